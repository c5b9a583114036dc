use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Activation;

/// The two named model configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Default,
    Improved,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Default => "default",
            ModelKind::Improved => "improved",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(ModelKind::Default),
            "improved" => Ok(ModelKind::Improved),
            other => Err(format!("unknown model `{other}` (expected default|improved)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv {
        filters: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
    },
    MaxPool {
        size: usize,
        stride: usize,
    },
    Act(Activation),
    Head,
}

/// Layer list plus the input and head geometry it must satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchSpec {
    /// `(channels, height, width)`
    pub input: [usize; 3],
    pub num_classes: usize,
    pub boxes_per_cell: usize,
    pub layers: Vec<LayerSpec>,
}

pub const INPUT_SIDE: usize = 416;
pub const GRID_SIZE: usize = 13;
pub const BOXES_PER_CELL: usize = 5;
pub const NUM_CLASSES: usize = 8;

const STAGE_CHANNELS: [usize; 6] = [16, 32, 64, 128, 256, 512];
const IMPROVED_EXTRA: [usize; 2] = [1024, 1024];
const IMPROVED_MISH_SITES: usize = 15;

impl ArchSpec {
    /// Full-size preset: 416×416×3 input, 13×13 grid.
    pub fn preset(kind: ModelKind, num_classes: usize, boxes: usize) -> Self {
        Self::scaled(kind, INPUT_SIDE, 1, num_classes, boxes)
    }

    /// The preset layer pattern with a different input side and every
    /// channel count divided by `width_div`. Used for fast tests.
    pub fn scaled(
        kind: ModelKind,
        input_side: usize,
        width_div: usize,
        num_classes: usize,
        boxes: usize,
    ) -> Self {
        let div = |c: usize| (c / width_div.max(1)).max(1);
        let stages: Vec<usize> = STAGE_CHANNELS.iter().map(|&c| div(c)).collect();
        let (extra, mish_sites): (Vec<usize>, usize) = match kind {
            ModelKind::Default => (Vec::new(), 0),
            ModelKind::Improved => (IMPROVED_EXTRA.iter().map(|&c| div(c)).collect(), IMPROVED_MISH_SITES),
        };
        Self::darknet_like(input_side, &stages, 5, &extra, mish_sites, num_classes, boxes)
    }

    /// 3×3 conv stages with 2×2 max-pools after the first `pools` stages,
    /// optional extra 3×3 convs, then a linear 1×1 head conv.
    /// The first `mish_sites` activations are Mish, the rest leaky ReLU.
    pub fn darknet_like(
        input_side: usize,
        stages: &[usize],
        pools: usize,
        extra: &[usize],
        mish_sites: usize,
        num_classes: usize,
        boxes: usize,
    ) -> Self {
        let mut layers = Vec::new();
        let mut site = 0;
        let act = |site: &mut usize| {
            let a = if *site < mish_sites {
                Activation::Mish
            } else {
                Activation::LeakyRelu
            };
            *site += 1;
            LayerSpec::Act(a)
        };
        for (i, &filters) in stages.iter().enumerate() {
            layers.push(LayerSpec::Conv {
                filters,
                kernel: 3,
                stride: 1,
                pad: 1,
            });
            layers.push(act(&mut site));
            if i < pools {
                layers.push(LayerSpec::MaxPool { size: 2, stride: 2 });
            }
        }
        for &filters in extra {
            layers.push(LayerSpec::Conv {
                filters,
                kernel: 3,
                stride: 1,
                pad: 1,
            });
            layers.push(act(&mut site));
        }
        layers.push(LayerSpec::Conv {
            filters: boxes * (num_classes + 5),
            kernel: 1,
            stride: 1,
            pad: 0,
        });
        layers.push(LayerSpec::Head);
        Self {
            input: [3, input_side, input_side],
            num_classes,
            boxes_per_cell: boxes,
            layers,
        }
    }

    pub fn head_channels(&self) -> usize {
        self.boxes_per_cell * (self.num_classes + 5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_layout() {
        let d = ArchSpec::preset(ModelKind::Default, 8, 5);
        let convs = |s: &ArchSpec| s.layers.iter().filter(|l| matches!(l, LayerSpec::Conv { .. })).count();
        assert_eq!(convs(&d), 7);
        assert_eq!(d.head_channels(), 65);
        assert!(d.layers.iter().all(|l| *l != LayerSpec::Act(Activation::Mish)));

        let i = ArchSpec::preset(ModelKind::Improved, 8, 5);
        assert_eq!(convs(&i), 9);
        let mish = i.layers.iter().filter(|l| **l == LayerSpec::Act(Activation::Mish)).count();
        // 8 activation sites, all within the first fifteen
        assert_eq!(mish, 8);
    }

    #[test]
    fn model_kind_parses() {
        assert_eq!("improved".parse::<ModelKind>().unwrap(), ModelKind::Improved);
        assert!("large".parse::<ModelKind>().is_err());
        assert_eq!(ModelKind::Default.to_string(), "default");
    }
}

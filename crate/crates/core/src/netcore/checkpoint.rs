//! Binary weight checkpoints.
//!
//! Layout (little-endian, no padding): magic `TWNET1\0`, `u32` weighted-layer
//! count, `u64` iteration, then per conv layer `u32` rank, `u32` dims, weights,
//! biases, weight momentum, bias momentum as `f32`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{ArchSpec, NetError, Network, Tensor};

pub const MAGIC: &[u8; 7] = b"TWNET1\0";

pub fn encode_checkpoint(net: &Network<f32>, iteration: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + net.parameter_count() * 8);
    out.extend_from_slice(MAGIC);
    let count = net.convs().count() as u32;
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&iteration.to_le_bytes());
    let put = |out: &mut Vec<u8>, t: &Tensor<f32>| {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    for conv in net.convs() {
        let shape = conv.weight.value.shape();
        out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        put(&mut out, &conv.weight.value);
        put(&mut out, &conv.bias.value);
        put(&mut out, &conv.weight.momentum);
        put(&mut out, &conv.bias.momentum);
    }
    out
}

/// Writes through a temporary sibling and renames, so an interrupted write
/// never replaces a valid checkpoint.
pub fn save_checkpoint(net: &Network<f32>, iteration: u64, path: &Path) -> Result<(), NetError> {
    let io = |source| NetError::Io {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(&encode_checkpoint(net, iteration)).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, context: &str) -> Result<&[u8], NetError> {
        if self.bytes.len() - self.pos < n {
            return Err(NetError::Truncated {
                path: self.path.to_path_buf(),
                context: format!("{context} at byte {}", self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, context: &str) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(self.take(4, context)?.try_into().unwrap()))
    }

    fn u64(&mut self, context: &str) -> Result<u64, NetError> {
        Ok(u64::from_le_bytes(self.take(8, context)?.try_into().unwrap()))
    }

    fn floats(&mut self, into: &mut [f32], context: &str) -> Result<(), NetError> {
        let raw = self.take(into.len() * 4, context)?;
        for (v, chunk) in into.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(())
    }
}

/// Decodes a checkpoint into a network built for `spec`; returns it with the
/// stored iteration counter.
pub fn decode_checkpoint(
    bytes: &[u8],
    spec: &ArchSpec,
    path: &Path,
) -> Result<(Network<f32>, u64), NetError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(NetError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
        path,
    };
    let count = r.u32("layer count")? as usize;
    let iteration = r.u64("iteration counter")?;
    let mut net = Network::<f32>::new(spec, 0)?;
    let expected = net.convs().count();
    if count != expected {
        return Err(NetError::CheckpointLayerCount {
            path: path.to_path_buf(),
            expected,
            found: count,
        });
    }
    for (i, conv) in net.convs_mut().enumerate() {
        let ctx = format!("layer {i}");
        let rank = r.u32(&ctx)? as usize;
        if rank > 8 {
            return Err(NetError::CheckpointShape {
                path: path.to_path_buf(),
                layer: i,
                expected: conv.weight.value.shape().to_vec(),
                found: vec![rank],
            });
        }
        let dims = (0..rank)
            .map(|_| r.u32(&ctx).map(|d| d as usize))
            .collect::<Result<Vec<_>, _>>()?;
        if dims != conv.weight.value.shape() {
            return Err(NetError::CheckpointShape {
                path: path.to_path_buf(),
                layer: i,
                expected: conv.weight.value.shape().to_vec(),
                found: dims,
            });
        }
        r.floats(conv.weight.value.data_mut(), &format!("{ctx} weights"))?;
        r.floats(conv.bias.value.data_mut(), &format!("{ctx} biases"))?;
        r.floats(conv.weight.momentum.data_mut(), &format!("{ctx} weight momentum"))?;
        r.floats(conv.bias.momentum.data_mut(), &format!("{ctx} bias momentum"))?;
    }
    if r.pos != bytes.len() {
        return Err(NetError::TrailingBytes {
            path: path.to_path_buf(),
            extra: bytes.len() - r.pos,
        });
    }
    Ok((net, iteration))
}

pub fn load_checkpoint(path: &Path, spec: &ArchSpec) -> Result<(Network<f32>, u64), NetError> {
    let bytes = fs::read(path).map_err(|source| NetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_checkpoint(&bytes, spec, path)
}

/// Iterations at which periodic checkpoints are written during a run that
/// ends at `total` (the final checkpoint is separate).
pub fn periodic_iterations(start: u64, total: u64, every: u64) -> Vec<u64> {
    if every == 0 {
        return Vec::new();
    }
    ((start / every + 1)..=(total / every)).map(|k| k * every).collect()
}

pub fn periodic_path(dir: &Path, iteration: u64) -> PathBuf {
    dir.join(format!("weights_{iteration:06}.ckpt"))
}

pub fn final_path(dir: &Path) -> PathBuf {
    dir.join("weights_final.ckpt")
}

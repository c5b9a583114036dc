use crate::data::{numbered_frames, read_ppm, Image};
use crate::Error;
use std::io::Read;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceInfo {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    /// Live sources may drop frames under backpressure; replays never do.
    pub live: bool,
}

/// An ordered stream of frames of fixed size.
pub trait FrameSource: Send {
    fn info(&self) -> SourceInfo;

    /// `None` at end of stream. An `Err` is a single bad frame; the stream
    /// may continue after it.
    fn next_frame(&mut self) -> Option<Result<Image, Error>>;
}

/// Replays a directory of numbered PPM frames in numeric order.
#[derive(Debug)]
pub struct DirSource {
    frames: std::vec::IntoIter<PathBuf>,
    info: SourceInfo,
}

impl DirSource {
    /// Frame size is taken from the first frame; later frames of another
    /// size are reported as malformed.
    pub fn open(dir: &Path, fps: f64) -> Result<Self, Error> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::Invalid(format!("fps must be positive, got {fps}")));
        }
        let frames: Vec<PathBuf> = numbered_frames(dir)?.into_iter().map(|f| f.1).collect();
        let (width, height) = match frames.first() {
            Some(p) => {
                let img = read_ppm(p)?;
                (img.width(), img.height())
            }
            None => (0, 0),
        };
        Ok(Self {
            frames: frames.into_iter(),
            info: SourceInfo {
                width,
                height,
                fps,
                live: false,
            },
        })
    }
}

impl FrameSource for DirSource {
    fn info(&self) -> SourceInfo {
        self.info
    }

    fn next_frame(&mut self) -> Option<Result<Image, Error>> {
        let path = self.frames.next()?;
        Some(read_ppm(&path).map_err(Error::from).and_then(|img| {
            if (img.width(), img.height()) == (self.info.width, self.info.height) {
                Ok(img)
            } else {
                Err(Error::Invalid(format!(
                    "{}: frame is {}x{}, stream is {}x{}",
                    path.display(),
                    img.width(),
                    img.height(),
                    self.info.width,
                    self.info.height
                )))
            }
        }))
    }
}

/// Back-to-back raw RGB24 frames, e.g. piped from a capture tool.
pub struct RawSource<R> {
    reader: R,
    info: SourceInfo,
    done: bool,
}

impl<R: Read + Send> RawSource<R> {
    pub fn new(reader: R, width: usize, height: usize, fps: f64) -> Result<Self, Error> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid(format!("frame size {width}x{height} is empty")));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::Invalid(format!("fps must be positive, got {fps}")));
        }
        Ok(Self {
            reader,
            info: SourceInfo {
                width,
                height,
                fps,
                live: true,
            },
            done: false,
        })
    }
}

impl<R: Read + Send> FrameSource for RawSource<R> {
    fn info(&self) -> SourceInfo {
        self.info
    }

    fn next_frame(&mut self) -> Option<Result<Image, Error>> {
        if self.done {
            return None;
        }
        let mut buf = vec![0u8; self.info.width * self.info.height * 3];
        let mut filled = 0;
        while filled < buf.len() {
            match self.reader.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    self.done = true;
                    return Some(Err(Error::Io {
                        context: "reading raw frame".into(),
                        source: e,
                    }));
                }
            }
        }
        if filled < buf.len() {
            self.done = true;
            if filled > 0 {
                log::warn!("discarding trailing partial frame of {filled} bytes");
            }
            return None;
        }
        Some(Ok(Image::new(self.info.width, self.info.height, buf).expect("buffer sized to frame")))
    }
}

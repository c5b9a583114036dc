use super::CLIP_SECONDS;

/// Frames in one clip at `fps`: `ceil(10 * fps)`.
pub fn clip_frames(fps: f64) -> u64 {
    (CLIP_SECONDS * fps).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Idle,
    Recording { event_id: u64, remaining: u64 },
}

/// What the caller must do for the current frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// A new event starts at this frame; save the annotated trigger frame.
    Open { event_id: u64, frame: u64 },
    /// Store this frame as clip frame number `index` of the event.
    Append { event_id: u64, frame: u64, index: u64 },
    /// Detections arrived during an active recording; note them only.
    Retrigger { event_id: u64, frame: u64 },
    /// The event is over; `partial` when the stream ended early.
    Close { event_id: u64, partial: bool },
}

/// The recording state machine. It never touches the filesystem; the watch
/// loop turns its actions into writes.
///
/// The trigger frame opens an event and is kept as a snapshot; the next
/// `clip_len` frames form the clip. Triggers while recording neither extend
/// the clip nor open another event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recorder {
    mode: Mode,
    clip_len: u64,
    next_event_id: u64,
}

impl Recorder {
    pub fn new(fps: f64) -> Self {
        Self::with_clip_len(clip_frames(fps))
    }

    pub fn with_clip_len(clip_len: u64) -> Self {
        Self {
            mode: Mode::Idle,
            clip_len: clip_len.max(1),
            next_event_id: 1,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn clip_len(&self) -> u64 {
        self.clip_len
    }

    pub fn step(&mut self, frame: u64, triggered: bool) -> Vec<Action> {
        match self.mode {
            Mode::Idle if triggered => {
                let event_id = self.next_event_id;
                self.next_event_id += 1;
                self.mode = Mode::Recording {
                    event_id,
                    remaining: self.clip_len,
                };
                vec![Action::Open { event_id, frame }]
            }
            Mode::Idle => Vec::new(),
            Mode::Recording { event_id, remaining } => {
                let mut actions = Vec::with_capacity(3);
                if triggered {
                    actions.push(Action::Retrigger { event_id, frame });
                }
                actions.push(Action::Append {
                    event_id,
                    frame,
                    index: self.clip_len - remaining,
                });
                if remaining == 1 {
                    actions.push(Action::Close {
                        event_id,
                        partial: false,
                    });
                    self.mode = Mode::Idle;
                } else {
                    self.mode = Mode::Recording {
                        event_id,
                        remaining: remaining - 1,
                    };
                }
                actions
            }
        }
    }

    /// End of stream: closes an active recording as partial.
    pub fn finish(&mut self) -> Vec<Action> {
        match std::mem::replace(&mut self.mode, Mode::Idle) {
            Mode::Recording { event_id, .. } => vec![Action::Close {
                event_id,
                partial: true,
            }],
            Mode::Idle => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_length_rounds_up() {
        assert_eq!(clip_frames(30.0), 300);
        assert_eq!(clip_frames(1.0), 10);
        assert_eq!(clip_frames(2.5), 25);
        assert_eq!(clip_frames(0.15), 2);
    }

    #[test]
    fn quiet_stream_does_nothing() {
        let mut r = Recorder::new(30.0);
        for f in 0..1000 {
            assert!(r.step(f, false).is_empty());
        }
        assert!(r.finish().is_empty());
    }

    #[test]
    fn single_trigger_at_thirty_fps() {
        let mut r = Recorder::new(30.0);
        let mut appended = 0;
        let mut closed = 0;
        for f in 0..1000 {
            for a in r.step(f, f == 5) {
                match a {
                    Action::Append { index, .. } => {
                        assert_eq!(index, appended);
                        appended += 1;
                    }
                    Action::Close { partial, .. } => {
                        assert!(!partial);
                        assert_eq!(f, 305);
                        closed += 1;
                    }
                    _ => {}
                }
            }
        }
        assert_eq!((appended, closed), (300, 1));
        assert_eq!(r.mode(), Mode::Idle);
    }

    #[test]
    fn triggers_inside_window_do_not_open_events() {
        let mut r = Recorder::new(30.0);
        let mut opened = Vec::new();
        for f in 0..1000 {
            for a in r.step(f, f == 5 || f == 100 || f == 400) {
                if let Action::Open { frame, .. } = a {
                    opened.push(frame);
                }
            }
        }
        assert_eq!(opened, vec![5, 400]);
    }

    #[test]
    fn end_of_stream_closes_partial() {
        let mut r = Recorder::new(1.0);
        r.step(0, true);
        r.step(1, false);
        assert_eq!(r.finish(), vec![Action::Close { event_id: 1, partial: true }]);
    }
}

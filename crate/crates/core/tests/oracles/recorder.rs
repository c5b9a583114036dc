//! The recording state machine as an explicit transition table.

use trashwatch::pipeline::{clip_frames, Action, Recorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum State {
    Idle,
    /// Clip frames still to store.
    Rec(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Out {
    Open,
    Retrigger,
    Append(u64),
    Close,
}

/// | state  | detection | next                 | outputs                         |
/// |--------|-----------|----------------------|---------------------------------|
/// | Idle   | no        | Idle                 | -                               |
/// | Idle   | yes       | Rec(L)               | Open                            |
/// | Rec(k) | no        | Rec(k-1), Idle if k=1| Append(L-k), Close if k=1       |
/// | Rec(k) | yes       | Rec(k-1), Idle if k=1| Retrigger, Append(L-k), Close.. |
pub fn table(state: State, detection: bool, clip_len: u64) -> (State, Vec<Out>) {
    match (state, detection) {
        (State::Idle, false) => (State::Idle, vec![]),
        (State::Idle, true) => (State::Rec(clip_len), vec![Out::Open]),
        (State::Rec(1), false) => (State::Idle, vec![Out::Append(clip_len - 1), Out::Close]),
        (State::Rec(1), true) => (State::Idle, vec![Out::Retrigger, Out::Append(clip_len - 1), Out::Close]),
        (State::Rec(k), false) => (State::Rec(k - 1), vec![Out::Append(clip_len - k)]),
        (State::Rec(k), true) => (State::Rec(k - 1), vec![Out::Retrigger, Out::Append(clip_len - k)]),
    }
}

fn project(actions: &[Action]) -> Vec<Out> {
    actions
        .iter()
        .map(|a| match *a {
            Action::Open { .. } => Out::Open,
            Action::Retrigger { .. } => Out::Retrigger,
            Action::Append { index, .. } => Out::Append(index),
            Action::Close { partial: false, .. } => Out::Close,
            Action::Close { partial: true, .. } => panic!("partial close during step"),
        })
        .collect()
}

/// Walks every detection/no-detection sequence of length up to `max_len`
/// depth-first and compares each step with the table; returns how many
/// traces were checked and the first disagreement, if any.
pub fn enumerate(fps: f64, max_len: usize) -> (u64, Option<String>) {
    let clip_len = clip_frames(fps);
    let mut traces = 0u64;
    let mut failure = None;
    fn walk(
        rec: &Recorder,
        state: State,
        depth: usize,
        max_len: usize,
        clip_len: u64,
        trace: &mut Vec<bool>,
        traces: &mut u64,
        failure: &mut Option<String>,
    ) {
        *traces += 1;
        // Ending the stream here closes an open clip as partial.
        let fin = rec.clone().finish();
        let partial_close = matches!(fin[..], [Action::Close { partial: true, .. }]);
        if partial_close != matches!(state, State::Rec(_)) || fin.len() > 1 {
            *failure = Some(format!("trace {trace:?}: finish gave {fin:?} in state {state:?}"));
        }
        if depth == max_len || failure.is_some() {
            return;
        }
        for det in [false, true] {
            let mut r = rec.clone();
            let actions = r.step(depth as u64, det);
            let (next, want) = table(state, det, clip_len);
            trace.push(det);
            if project(&actions) != want {
                *failure = Some(format!("trace {trace:?}: got {actions:?}, table says {want:?}"));
            }
            let ids_ok = actions.iter().all(|a| match a {
                Action::Open { frame, .. } => *frame == depth as u64,
                _ => true,
            });
            if !ids_ok {
                *failure = Some(format!("trace {trace:?}: wrong frame index in {actions:?}"));
            }
            walk(&r, next, depth + 1, max_len, clip_len, trace, traces, failure);
            trace.pop();
        }
    }
    walk(&Recorder::new(fps), State::Idle, 0, max_len, clip_len, &mut Vec::new(), &mut traces, &mut failure);
    (traces, failure)
}

//! Line-oriented serial-style logs, kept in memory and mirrored to writers.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

pub type LineSink = Box<dyn Write + Send>;

#[derive(Default)]
pub struct LineLog {
    lines: VecDeque<String>,
    capacity: Option<usize>,
    mirrors: Vec<LineSink>,
}

impl LineLog {
    pub fn unbounded() -> Self {
        Self::default()
    }

    /// Keeps only the most recent `capacity` lines in memory.
    pub fn ring(capacity: usize) -> Self {
        Self {
            capacity: Some(capacity),
            ..Self::default()
        }
    }

    pub fn add_mirror(&mut self, sink: LineSink) {
        self.mirrors.push(sink);
    }

    pub fn push(&mut self, line: impl Into<String>) {
        let line = line.into();
        for m in &mut self.mirrors {
            // A broken mirror must not stop the device pipeline.
            let _ = writeln!(m, "{line}").and_then(|_| m.flush());
        }
        if let Some(cap) = self.capacity {
            if cap == 0 {
                return;
            }
            while self.lines.len() >= cap {
                self.lines.pop_front();
            }
        }
        self.lines.push_back(line);
    }

    pub fn lines(&self) -> Vec<String> {
        self.lines.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

impl fmt::Debug for LineLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineLog")
            .field("lines", &self.lines.len())
            .field("capacity", &self.capacity)
            .field("mirrors", &self.mirrors.len())
            .finish()
    }
}

//! Update-stream text format.
//!
//! ```text
//! # comment
//! n 6
//! + 0 1
//! - 0 1
//! ```
//!
//! The header must come before the first event. Vertices are 0-indexed.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateEvent {
    Insert(Edge),
    Delete(Edge),
}

impl UpdateEvent {
    pub fn edge(self) -> Edge {
        match self {
            UpdateEvent::Insert(e) | UpdateEvent::Delete(e) => e,
        }
    }

    pub fn is_insert(self) -> bool {
        matches!(self, UpdateEvent::Insert(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateStream {
    pub n: usize,
    pub events: Vec<UpdateEvent>,
}

impl UpdateStream {
    pub fn new(n: usize) -> Self {
        UpdateStream {
            n,
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push_insert(&mut self, e: Edge) {
        self.events.push(UpdateEvent::Insert(e));
    }

    pub fn push_delete(&mut self, e: Edge) {
        self.events.push(UpdateEvent::Delete(e));
    }

    pub fn parse(text: &str) -> Result<UpdateStream> {
        let mut n: Option<usize> = None;
        let mut events = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["n", count] => {
                    if n.is_some() {
                        return Err(parse_err("duplicate header".into()));
                    }
                    let count = count
                        .parse::<usize>()
                        .map_err(|_| parse_err(format!("bad vertex count {count:?}")))?;
                    n = Some(count);
                }
                [op @ ("+" | "-"), a, b] => {
                    let n = n.ok_or_else(|| parse_err("event before `n <N>` header".into()))?;
                    let a = a
                        .parse::<usize>()
                        .map_err(|_| parse_err(format!("bad vertex {a:?}")))?;
                    let b = b
                        .parse::<usize>()
                        .map_err(|_| parse_err(format!("bad vertex {b:?}")))?;
                    if a >= n || b >= n {
                        return Err(parse_err(format!("vertex out of range for n = {n}")));
                    }
                    let e = Edge::new(a, b).map_err(|err| parse_err(err.to_string()))?;
                    events.push(if *op == "+" {
                        UpdateEvent::Insert(e)
                    } else {
                        UpdateEvent::Delete(e)
                    });
                }
                _ => return Err(parse_err(format!("unrecognized line {line:?}"))),
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            message: "missing `n <N>` header".into(),
        })?;
        Ok(UpdateStream { n, events })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.events.len() * 12);
        let _ = writeln!(out, "n {}", self.n);
        for ev in &self.events {
            let (sign, e) = match ev {
                UpdateEvent::Insert(e) => ('+', e),
                UpdateEvent::Delete(e) => ('-', e),
            };
            let _ = writeln!(out, "{sign} {} {}", e.u(), e.v());
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<UpdateStream> {
        UpdateStream::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

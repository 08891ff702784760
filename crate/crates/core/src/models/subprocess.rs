//! Line-protocol predictor backed by a child process.
//!
//! Request: one line of comma-separated feature values on the child's stdin.
//! Response: one line containing a decimal probability on its stdout. This
//! lets arbitrary external models participate in an evaluation.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::{ModelError, Predictor};
use crate::datamodel::Instance;

struct Pipes {
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct SubprocessModel {
    arity: usize,
    child: Mutex<Child>,
    pipes: Mutex<Pipes>,
    queries: AtomicU64,
}

impl SubprocessModel {
    /// Spawn `command` through `sh -c` and speak the line protocol with it.
    pub fn spawn(command: &str, arity: usize) -> Result<SubprocessModel, ModelError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| ModelError::Subprocess(format!("spawn '{command}': {e}")))?;
        let stdin = child
            .stdin
            .take()
            .ok_or_else(|| ModelError::Subprocess("no stdin pipe".into()))?;
        let stdout = child
            .stdout
            .take()
            .ok_or_else(|| ModelError::Subprocess("no stdout pipe".into()))?;
        Ok(SubprocessModel {
            arity,
            child: Mutex::new(child),
            pipes: Mutex::new(Pipes {
                stdin,
                stdout: BufReader::new(stdout),
            }),
            queries: AtomicU64::new(0),
        })
    }
}

impl Predictor for SubprocessModel {
    fn predict_proba(&self, x: &Instance) -> Result<f64, ModelError> {
        if x.len() != self.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);

        let request = x
            .values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");

        let mut pipes = self.pipes.lock().expect("subprocess pipes poisoned");
        writeln!(pipes.stdin, "{request}")
            .map_err(|e| ModelError::Subprocess(format!("write request: {e}")))?;
        pipes
            .stdin
            .flush()
            .map_err(|e| ModelError::Subprocess(format!("flush request: {e}")))?;

        let mut line = String::new();
        let n = pipes
            .stdout
            .read_line(&mut line)
            .map_err(|e| ModelError::Subprocess(format!("read response: {e}")))?;
        if n == 0 {
            return Err(ModelError::Subprocess("child closed its stdout".into()));
        }
        let p: f64 = line
            .trim()
            .parse()
            .map_err(|_| ModelError::Subprocess(format!("bad response line '{}'", line.trim())))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::Subprocess(format!(
                "response {p} outside [0, 1]"
            )));
        }
        Ok(p)
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

impl Drop for SubprocessModel {
    fn drop(&mut self) {
        if let Ok(mut child) = self.child.lock() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

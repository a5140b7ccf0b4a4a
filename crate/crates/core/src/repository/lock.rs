use std::fs::OpenOptions;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use super::RepoError;

pub const LOCK_FILE: &str = "lock";

/// Exclusive advisory lock: the `lock` file exists exactly while held.
#[derive(Debug)]
pub struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    /// Retries every few milliseconds until `timeout` elapses, then reports
    /// contention instead of blocking.
    pub fn acquire(root: &Path, timeout: Duration) -> Result<LockGuard, RepoError> {
        let path = root.join(LOCK_FILE);
        let start = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    let _ = writeln!(f, "{}", std::process::id());
                    return Ok(LockGuard { path });
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    if start.elapsed() >= timeout {
                        return Err(RepoError::Locked(path));
                    }
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(RepoError::io(&path, e)),
            }
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

//! The on-disk event log shared by the CLI and the service.
//!
//! A state directory holds `events.jsonl`, the canonical log of every
//! applied event in apply order, and `lock`, which the owning process holds
//! an exclusive advisory lock on. Appends are flushed with `fsync` before
//! they are acknowledged.

use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use gemtrail_core::ingest::to_jsonl;
use gemtrail_core::Event;
use thiserror::Error;

pub const LOG_FILE: &str = "events.jsonl";
pub const LOCK_FILE: &str = "lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("state directory {0} is in use by another process")]
    Locked(PathBuf),
}

pub struct Store {
    dir: PathBuf,
    log: Mutex<File>,
    _lock: File,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("dir", &self.dir).finish()
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Store {
    /// Opens (creating if needed) the state directory and takes its lock.
    ///
    /// A torn final line left by a crash mid-append is cut off, since it was
    /// never acknowledged.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let lock_path = dir.join(LOCK_FILE);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(io_err(&lock_path))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(StoreError::Locked(dir.to_path_buf())),
            Err(TryLockError::Error(e)) => return Err(io_err(&lock_path)(e)),
        }
        let log_path = dir.join(LOG_FILE);
        let mut log = OpenOptions::new()
            .create(true)
            .truncate(false)
            .read(true)
            .append(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        repair_tail(&mut log).map_err(io_err(&log_path))?;
        Ok(Store {
            dir: dir.to_path_buf(),
            log: Mutex::new(log),
            _lock: lock,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log_path(&self) -> PathBuf {
        self.dir.join(LOG_FILE)
    }

    /// Every line currently in the log.
    pub fn read_lines(&self) -> Result<Vec<String>, StoreError> {
        let path = self.log_path();
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(text.lines().map(str::to_string).collect())
    }

    /// Appends events in order and syncs them to disk.
    pub fn append(&self, events: &[Event]) -> Result<(), StoreError> {
        if events.is_empty() {
            return Ok(());
        }
        let text = to_jsonl(events);
        let path = self.log_path();
        let mut log = self.log.lock().unwrap_or_else(|p| p.into_inner());
        log.write_all(text.as_bytes()).map_err(io_err(&path))?;
        log.sync_data().map_err(io_err(&path))
    }
}

fn repair_tail(log: &mut File) -> io::Result<()> {
    let len = log.metadata()?.len();
    if len == 0 {
        return Ok(());
    }
    let mut last = [0u8; 1];
    log.seek(SeekFrom::Start(len - 1))?;
    log.read_exact(&mut last)?;
    if last[0] == b'\n' {
        return Ok(());
    }
    let mut text = Vec::with_capacity(len as usize);
    log.seek(SeekFrom::Start(0))?;
    log.read_to_end(&mut text)?;
    let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    log.set_len(keep as u64)?;
    log.sync_data()
}

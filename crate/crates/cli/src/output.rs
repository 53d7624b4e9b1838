//! Output directory handling. Every file is written atomically.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use spw_core::io;

pub struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        io::write_atomic(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    /// Renders CSV into memory, then writes it in one step.
    pub fn csv(&mut self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> spw_core::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let bytes = io::to_json_bytes(value)?;
        self.write(name, &bytes)
    }

    /// Lists the written files on stdout.
    pub fn finish(self) {
        for path in self.written {
            println!("{}", path.display());
        }
    }
}

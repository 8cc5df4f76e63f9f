use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

/// Layout versions of the JSON documents this binary reads and writes.
pub const SCHEMAS: [(&str, &str); 7] = [
    ("window", "1"),
    ("audit", "1"),
    ("cover", "1"),
    ("decision", "1"),
    ("afragment", "1"),
    ("witness", "1"),
    ("manifest", "1"),
];

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance block embedded in every JSON document the CLI writes.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub seed: u64,
    pub threads: usize,
    pub versions: Map<String, Value>,
    pub inputs: Vec<InputDigest>,
    pub wall_time_ms: u128,
    pub nodes: u64,
}

pub struct Recorder {
    command: Vec<String>,
    seed: u64,
    started: Instant,
    inputs: Vec<InputDigest>,
    nodes: u64,
}

pub fn versions() -> Map<String, Value> {
    let mut v = Map::new();
    v.insert("coarsedim".into(), env!("CARGO_PKG_VERSION").into());
    for (name, version) in SCHEMAS {
        v.insert(format!("{name}_schema"), version.into());
    }
    v
}

impl Recorder {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        Recorder {
            command,
            seed,
            started: Instant::now(),
            inputs: Vec::new(),
            nodes: 0,
        }
    }

    pub fn input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push(InputDigest {
            path: path.into(),
            sha256: coarsedim::content_digest(bytes),
        });
    }

    pub fn add_nodes(&mut self, n: u64) {
        self.nodes += n;
    }

    pub fn finish(&self) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            seed: self.seed,
            threads: rayon::current_num_threads(),
            versions: versions(),
            inputs: self.inputs.clone(),
            wall_time_ms: self.started.elapsed().as_millis(),
            nodes: self.nodes,
        }
    }
}

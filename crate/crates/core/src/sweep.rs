//! Benchmark sweeps: run protocols over every party tuple of many networks,
//! stream per-run records, and aggregate mean measurement counts per cell.
//!
//! Networks are processed in parallel chunks but emitted in enumeration
//! order, and all randomness is derived from the master seed and the cell
//! coordinates, so output never depends on the thread count.

use std::fmt;
use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dodag::{build_dodag, select_root, DodagTree};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::protocols::{
    dodag_x, dodag_x_nparty, repeater_protocol, x_protocol, PartySet, RoutingOutcome,
};
use crate::topology::{generate, TopologySpec};

pub const RAW_HEADER: [&str; 15] = [
    "topology", "rows", "cols", "n", "k", "p", "seed", "protocol", "a", "b", "c", "x_count", "z_count", "total",
    "success",
];
pub const AGGREGATE_HEADER: [&str; 9] = ["topology", "rows", "cols", "n", "k", "p", "protocol", "mean_total", "samples"];
pub const DIFF_HEADER: [&str; 7] = ["topology", "rows", "cols", "n", "k", "p", "percent_difference"];

/// Networks per parallel batch; bounds memory held before emission.
const CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    DodagX,
    X,
    Repeater,
    NParty,
}

impl ProtocolId {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::DodagX => "dodag-x",
            ProtocolId::X => "x",
            ProtocolId::Repeater => "repeater",
            ProtocolId::NParty => "nparty",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dodag-x" => Ok(ProtocolId::DodagX),
            "x" => Ok(ProtocolId::X),
            "repeater" => Ok(ProtocolId::Repeater),
            "nparty" => Ok(ProtocolId::NParty),
            other => Err(Error::InvalidParameter(format!("unknown protocol '{other}'"))),
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Percent fewer measurements of `me` relative to the baseline `mp`.
pub fn percent_difference(mp: f64, me: f64) -> Result<f64> {
    if mp == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((mp - me) / mp * 100.0)
}

/// Topology parameters identifying an aggregation cell (seed excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub topology: &'static str,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub n: usize,
    pub k: Option<usize>,
    pub p: Option<f64>,
}

impl CellKey {
    pub fn of(spec: &TopologySpec) -> CellKey {
        let mut key = CellKey {
            topology: "",
            rows: None,
            cols: None,
            n: spec.vertex_count(),
            k: None,
            p: None,
        };
        match *spec {
            TopologySpec::Grid { rows, cols } => {
                key.topology = "grid";
                key.rows = Some(rows);
                key.cols = Some(cols);
            }
            TopologySpec::SmallWorld { k, p, .. } => {
                key.topology = "small-world";
                key.k = Some(k);
                key.p = Some(p);
            }
            TopologySpec::Star { .. } => key.topology = "star",
            TopologySpec::Ring { .. } => key.topology = "ring",
            TopologySpec::RandomTree { .. } => key.topology = "random-tree",
        }
        key
    }

    fn fields(&self) -> [String; 6] {
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.topology.to_string(),
            opt(self.rows),
            opt(self.cols),
            self.n.to_string(),
            opt(self.k),
            self.p.map(|p| format!("{p:.6}")).unwrap_or_default(),
        ]
    }

    /// Equality on the written form, so parsed keys match generated ones.
    fn same_cell(&self, other: &CellKey) -> bool {
        self.fields() == other.fields()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub cell: CellKey,
    pub seed: Option<u64>,
    pub protocol: ProtocolId,
    pub parties: Vec<VertexId>,
    pub x_count: usize,
    pub z_count: usize,
    pub success: bool,
}

impl BenchmarkRecord {
    pub fn total(&self) -> usize {
        self.x_count + self.z_count
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.cell.fields().into();
        out.push(self.seed.map(|s| s.to_string()).unwrap_or_default());
        out.push(self.protocol.to_string());
        for i in 0..3 {
            out.push(self.parties.get(i).map(|v| v.to_string()).unwrap_or_default());
        }
        out.push(self.x_count.to_string());
        out.push(self.z_count.to_string());
        out.push(self.total().to_string());
        out.push(self.success.to_string());
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCell {
    pub cell: CellKey,
    pub protocol: ProtocolId,
    pub sum_total: u64,
    pub samples: u64,
}

impl AggregateCell {
    pub fn mean_total(&self) -> f64 {
        self.sum_total as f64 / self.samples as f64
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.cell.fields().into();
        out.push(self.protocol.to_string());
        out.push(format!("{:.6}", self.mean_total()));
        out.push(self.samples.to_string());
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffCell {
    pub cell: CellKey,
    pub percent_difference: f64,
}

impl DiffCell {
    pub fn csv_fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.cell.fields().into();
        out.push(format!("{:.6}", self.percent_difference));
        out
    }
}

/// Which party tuples each network is benchmarked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartyMode {
    /// Every unordered pair.
    Pairs,
    /// Every unordered triplet, or, when `sample_above` is set and the
    /// network is larger, `sample_count` random triplets.
    Triplets {
        sample_above: Option<usize>,
        sample_count: usize,
    },
}

impl PartyMode {
    pub fn all_triplets() -> Self {
        PartyMode::Triplets {
            sample_above: None,
            sample_count: 0,
        }
    }

    pub fn sampled_triplets(threshold: usize, count: usize) -> Self {
        PartyMode::Triplets {
            sample_above: Some(threshold),
            sample_count: count,
        }
    }
}

/// One network to benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkJob {
    pub spec: TopologySpec,
    /// Written to the seed column; `None` for deterministic families.
    pub seed: Option<u64>,
}

/// A full sweep: networks in emission order, the party tuples and protocols
/// run on each, and the (baseline, evaluated) pair for the diff table.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub jobs: Vec<NetworkJob>,
    pub parties: PartyMode,
    pub protocols: Vec<ProtocolId>,
    pub diff: Option<(ProtocolId, ProtocolId)>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepSummary {
    /// One entry per (cell, protocol), in first-seen order.
    pub aggregates: Vec<AggregateCell>,
    pub diffs: Vec<DiffCell>,
    /// Networks whose generation failed and were left out.
    pub skipped: Vec<NetworkJob>,
    pub runs: u64,
    pub failures: u64,
}

impl SweepSummary {
    pub fn mean(&self, cell: &CellKey, protocol: ProtocolId) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.protocol == protocol && a.cell.same_cell(cell))
            .map(AggregateCell::mean_total)
    }

    pub fn diff(&self, cell: &CellKey) -> Option<f64> {
        self.diffs
            .iter()
            .find(|d| d.cell.same_cell(cell))
            .map(|d| d.percent_difference)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a sweep cell replicate, mixed from the master seed and the
/// cell coordinates.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

fn party_tuples(mode: PartyMode, n: usize, seed: u64) -> Vec<Vec<VertexId>> {
    match mode {
        PartyMode::Pairs => (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| vec![a, b]))
            .collect(),
        PartyMode::Triplets {
            sample_above: Some(limit),
            sample_count,
        } if n > limit => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..sample_count)
                .map(|_| {
                    let mut t = sample(&mut rng, n, 3).into_vec();
                    t.sort_unstable();
                    t
                })
                .collect()
        }
        PartyMode::Triplets { .. } => {
            let mut out = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        out.push(vec![a, b, c]);
                    }
                }
            }
            out
        }
    }
}

fn run_protocol(protocol: ProtocolId, g: &Graph, tree: &DodagTree, parties: &PartySet) -> Result<RoutingOutcome> {
    let p = parties.as_slice();
    match protocol {
        ProtocolId::DodagX => dodag_x(tree.tree_graph(), tree, parties),
        ProtocolId::NParty => dodag_x_nparty(tree.tree_graph(), tree, parties),
        ProtocolId::X => x_protocol(g, parties),
        ProtocolId::Repeater if p.len() == 2 => repeater_protocol(g, p[0], p[1]),
        ProtocolId::Repeater => Err(Error::InvalidParties("repeater protocol takes two parties".into())),
    }
}

/// Records for one network, or `None` when the network cannot be built.
fn run_job(sweep: &Sweep, job_index: usize) -> Result<Option<Vec<BenchmarkRecord>>> {
    let job = sweep.jobs[job_index];
    let g = match generate(&job.spec) {
        Ok(g) => g,
        Err(Error::GenerationFailed { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let tree = build_dodag(&g, select_root(&g)?)?;
    let cell = CellKey::of(&job.spec);
    let tuple_seed = derive_seed(sweep.master_seed, &[0x7472_6970, job_index as u64]);
    let tuples = party_tuples(sweep.parties, g.vertex_count(), tuple_seed);
    let mut records = Vec::with_capacity(tuples.len() * sweep.protocols.len());
    for tuple in tuples {
        let parties = PartySet::new(tuple)?;
        for &protocol in &sweep.protocols {
            let (x_count, z_count, success) = match run_protocol(protocol, &g, &tree, &parties) {
                Ok(out) => (out.x_count(), out.z_count(), out.success),
                Err(Error::RoutingFailed { partial_log, .. }) => {
                    (partial_log.x_count(), partial_log.z_count(), false)
                }
                Err(e) => return Err(e),
            };
            records.push(BenchmarkRecord {
                cell,
                seed: job.seed,
                protocol,
                parties: parties.as_slice().to_vec(),
                x_count,
                z_count,
                success,
            });
        }
    }
    Ok(Some(records))
}

impl Sweep {
    /// Runs every job, handing each record to `sink` in deterministic
    /// order.
    pub fn run<F>(&self, mut sink: F) -> Result<SweepSummary>
    where
        F: FnMut(&BenchmarkRecord) -> Result<()>,
    {
        let mut summary = SweepSummary::default();
        let indices: Vec<usize> = (0..self.jobs.len()).collect();
        for chunk in indices.chunks(CHUNK) {
            let results: Vec<Result<Option<Vec<BenchmarkRecord>>>> =
                chunk.par_iter().map(|&i| run_job(self, i)).collect();
            for (&i, result) in chunk.iter().zip(results) {
                let Some(records) = result? else {
                    summary.skipped.push(self.jobs[i]);
                    continue;
                };
                for r in &records {
                    sink(r)?;
                    summary.add(r);
                }
            }
        }
        if let Some((base, eval)) = self.diff {
            summary.diffs = diff_cells(&summary.aggregates, base, eval)?;
        }
        Ok(summary)
    }

    /// Runs and keeps every record in memory.
    pub fn collect(&self) -> Result<(Vec<BenchmarkRecord>, SweepSummary)> {
        let mut records = Vec::new();
        let summary = self.run(|r| {
            records.push(r.clone());
            Ok(())
        })?;
        Ok((records, summary))
    }

    /// Runs, writing raw records as CSV to `out`.
    pub fn run_to_csv<W: Write>(&self, out: W) -> Result<SweepSummary> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RAW_HEADER).map_err(csv_err)?;
        let summary = self.run(|r| w.write_record(r.csv_fields()).map_err(csv_err))?;
        w.flush()?;
        Ok(summary)
    }
}

impl SweepSummary {
    fn add(&mut self, r: &BenchmarkRecord) {
        self.runs += 1;
        if !r.success {
            self.failures += 1;
        }
        // Records arrive grouped by cell, so the match is almost always at
        // the end.
        let slot = self
            .aggregates
            .iter_mut()
            .rev()
            .find(|a| a.protocol == r.protocol && a.cell.same_cell(&r.cell));
        match slot {
            Some(a) => {
                a.sum_total += r.total() as u64;
                a.samples += 1;
            }
            None => self.aggregates.push(AggregateCell {
                cell: r.cell,
                protocol: r.protocol,
                sum_total: r.total() as u64,
                samples: 1,
            }),
        }
    }
}

fn diff_cells(aggregates: &[AggregateCell], base: ProtocolId, eval: ProtocolId) -> Result<Vec<DiffCell>> {
    let mut out = Vec::new();
    for b in aggregates.iter().filter(|a| a.protocol == base) {
        if let Some(e) = aggregates
            .iter()
            .find(|a| a.protocol == eval && a.cell.same_cell(&b.cell))
        {
            out.push(DiffCell {
                cell: b.cell,
                percent_difference: percent_difference(b.mean_total(), e.mean_total())?,
            });
        }
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

pub fn write_aggregates_csv<W: Write>(out: W, cells: &[AggregateCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for c in cells {
        w.write_record(c.csv_fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diffs_csv<W: Write>(out: W, cells: &[DiffCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIFF_HEADER).map_err(csv_err)?;
    for c in cells {
        w.write_record(c.csv_fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_topology(s: &str) -> Result<&'static str> {
    ["grid", "small-world", "star", "ring", "random-tree"]
        .into_iter()
        .find(|&t| t == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown topology '{s}'")))
}

/// Recomputes per-cell aggregates from a raw CSV stream.
pub fn aggregate_raw_csv<R: Read>(input: R) -> Result<Vec<AggregateCell>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if !header.iter().eq(RAW_HEADER) {
        return Err(Error::InvalidParameter(format!("unexpected raw header {header:?}")));
    }
    let mut summary = SweepSummary::default();
    for row in rd.records() {
        let row = row.map_err(csv_err)?;
        let num = |i: usize| -> Result<Option<usize>> {
            let s = &row[i];
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| Error::InvalidParameter(format!("bad integer '{s}' in column {}", RAW_HEADER[i])))
        };
        let p = match &row[5] {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad p '{s}'")))?,
            ),
        };
        let required = |i: usize| num(i)?.ok_or_else(|| Error::InvalidParameter(format!("missing {}", RAW_HEADER[i])));
        let record = BenchmarkRecord {
            cell: CellKey {
                topology: parse_topology(&row[0])?,
                rows: num(1)?,
                cols: num(2)?,
                n: required(3)?,
                k: num(4)?,
                p,
            },
            seed: None,
            protocol: ProtocolId::parse(&row[7])?,
            parties: Vec::new(),
            x_count: required(11)?,
            z_count: required(12)?,
            success: &row[14] == "true",
        };
        summary.add(&record);
    }
    Ok(summary.aggregates)
}

/// Grid sweep over `rows` x `cols` lattices, X-protocol against DODAG-X on
/// triplets.
pub fn grid_sweep(rows: &[usize], cols: &[usize], parties: PartyMode) -> Sweep {
    let jobs = rows
        .iter()
        .flat_map(|&r| {
            cols.iter().map(move |&c| NetworkJob {
                spec: TopologySpec::Grid { rows: r, cols: c },
                seed: None,
            })
        })
        .collect();
    Sweep {
        jobs,
        parties,
        protocols: vec![ProtocolId::DodagX, ProtocolId::X],
        diff: Some((ProtocolId::X, ProtocolId::DodagX)),
        master_seed: 0,
    }
}

/// Small-world jobs over `ns` x `ks` x `ps` x `seeds` replicates, with
/// network seeds derived from `master_seed`.
pub fn small_world_jobs(ns: &[usize], ks: &[usize], ps: &[f64], seeds: usize, master_seed: u64) -> Vec<NetworkJob> {
    let mut jobs = Vec::new();
    for &n in ns {
        for &k in ks {
            for (pi, &p) in ps.iter().enumerate() {
                for rep in 0..seeds {
                    let seed = derive_seed(master_seed, &[n as u64, k as u64, pi as u64, rep as u64]);
                    jobs.push(NetworkJob {
                        spec: TopologySpec::SmallWorld { n, k, p, seed },
                        seed: Some(seed),
                    });
                }
            }
        }
    }
    jobs
}

/// Small-world triplet sweep at fixed `n` over the `(k, p)` plane.
pub fn small_world_sweep(n: usize, ks: &[usize], ps: &[f64], seeds: usize, master_seed: u64, parties: PartyMode) -> Sweep {
    Sweep {
        jobs: small_world_jobs(&[n], ks, ps, seeds, master_seed),
        parties,
        protocols: vec![ProtocolId::DodagX, ProtocolId::X],
        diff: Some((ProtocolId::X, ProtocolId::DodagX)),
        master_seed,
    }
}

/// Mean counts against network size for a fixed `k`.
pub fn fixed_k_scan(k: usize, ns: &[usize], ps: &[f64], seeds: usize, master_seed: u64, parties: PartyMode) -> Sweep {
    Sweep {
        jobs: small_world_jobs(ns, &[k], ps, seeds, master_seed),
        parties,
        protocols: vec![ProtocolId::DodagX, ProtocolId::X],
        diff: Some((ProtocolId::X, ProtocolId::DodagX)),
        master_seed,
    }
}

/// Two-party X-protocol against the repeater baseline on the given networks.
pub fn repeater_comparison(jobs: Vec<NetworkJob>, master_seed: u64) -> Sweep {
    Sweep {
        jobs,
        parties: PartyMode::Pairs,
        protocols: vec![ProtocolId::X, ProtocolId::Repeater],
        diff: Some((ProtocolId::Repeater, ProtocolId::X)),
        master_seed,
    }
}

/// X-protocol alone over the small-world `(k, p)` plane, for two or three
/// parties.
pub fn x_protocol_panel(n: usize, ks: &[usize], ps: &[f64], seeds: usize, master_seed: u64, parties: PartyMode) -> Sweep {
    Sweep {
        jobs: small_world_jobs(&[n], ks, ps, seeds, master_seed),
        parties,
        protocols: vec![ProtocolId::X],
        diff: None,
        master_seed,
    }
}

/// Default parameter sets for the standard benchmark sweeps.
pub mod presets {
    use super::*;

    pub const GRID_SIDES: [usize; 8] = [2, 3, 4, 5, 6, 7, 8, 9];
    pub const SMALL_WORLD_N: usize = 30;
    pub const FIXED_K: usize = 9;
    pub const FIXED_K_NS: [usize; 5] = [20, 30, 40, 50, 60];
    pub const FIXED_K_PS: [f64; 4] = [0.0, 0.1, 0.5, 1.0];
    pub const REPEATER_GRID_SIDES: [usize; 7] = [2, 3, 4, 5, 6, 7, 8];
    pub const REPEATER_STAR_NS: [usize; 8] = [3, 4, 6, 8, 12, 16, 24, 32];
    pub const REPEATER_SMALL_WORLD_NS: [usize; 5] = [10, 20, 30, 40, 50];
    pub const REPEATER_SMALL_WORLD_K: usize = 4;
    pub const REPEATER_SMALL_WORLD_P: f64 = 0.2;
    pub const PANEL_KS: [usize; 6] = [2, 4, 6, 8, 10, 12];

    /// `2, 4, …, 24`.
    pub fn small_world_ks() -> Vec<usize> {
        (1..=12).map(|i| 2 * i).collect()
    }

    /// `0.0, 0.1, …, 1.0`.
    pub fn small_world_ps() -> Vec<f64> {
        (0..=10).map(|i| f64::from(i) / 10.0).collect()
    }

    pub fn grid(parties: PartyMode) -> Sweep {
        grid_sweep(&GRID_SIDES, &GRID_SIDES, parties)
    }

    pub fn small_world(seeds: usize, master_seed: u64, parties: PartyMode) -> Sweep {
        small_world_sweep(SMALL_WORLD_N, &small_world_ks(), &small_world_ps(), seeds, master_seed, parties)
    }

    pub fn fixed_k(seeds: usize, master_seed: u64, parties: PartyMode) -> Sweep {
        fixed_k_scan(FIXED_K, &FIXED_K_NS, &FIXED_K_PS, seeds, master_seed, parties)
    }

    /// Square grids, stars and small-world networks for the two-party
    /// repeater comparison.
    pub fn repeater(seeds: usize, master_seed: u64) -> Sweep {
        let mut jobs: Vec<NetworkJob> = REPEATER_GRID_SIDES
            .iter()
            .map(|&s| NetworkJob {
                spec: TopologySpec::Grid { rows: s, cols: s },
                seed: None,
            })
            .collect();
        jobs.extend(REPEATER_STAR_NS.iter().map(|&n| NetworkJob {
            spec: TopologySpec::Star { n },
            seed: None,
        }));
        jobs.extend(small_world_jobs(
            &REPEATER_SMALL_WORLD_NS,
            &[REPEATER_SMALL_WORLD_K],
            &[REPEATER_SMALL_WORLD_P],
            seeds,
            master_seed,
        ));
        repeater_comparison(jobs, master_seed)
    }

    /// X-protocol over the `(k, p)` plane at `N = 30` for `parties`.
    pub fn x_panel(seeds: usize, master_seed: u64, parties: PartyMode) -> Sweep {
        x_protocol_panel(SMALL_WORLD_N, &PANEL_KS, &small_world_ps(), seeds, master_seed, parties)
    }
}

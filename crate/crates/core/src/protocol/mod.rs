//! The relay chain protocol: quantum phase over a chain of nodes, sifting of
//! rounds into beneficiary groups, error estimation, reconciliation, privacy
//! amplification, and the relay's shadow reconstruction of the end-to-end key.
//!
//! A chain is an ordered list of nodes. The first node prepares qubits, every
//! interior node measures-and-resends them, the last node measures. After many
//! rounds everyone announces their basis choices and the rounds are sifted:
//! within one round, every maximal run of adjacent nodes that chose the same
//! basis (length at least two) donates its bit to the run's two endpoints —
//! the beneficiary pair — while the run's interior nodes also know the bit.
//! For a three-node chain this reproduces the classic four groups (endpoints
//! only, left pair, right pair, unusable); longer chains yield one key per
//! node pair that can be bridged by equal bases.
//!
//! Each beneficiary pair then runs estimation, reconciliation, and
//! amplification over its collected bits. Everything either side announces is
//! captured in a [`PublicDiscussion`], which is also exactly what an interior
//! relay can overhear — [`carol_shadow_key`] replays it against the relay's
//! own raw bits to reconstruct the endpoints' final key.

pub mod amplify;
pub mod recon;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::hamming;
use crate::error::{Error, FailureClass, Result};
use crate::quantum::{
    apply_noise, intercept_resend, measure_qubit, prepare_qubit, Basis, NoiseModel,
};
use crate::rng::RngStream;
use crate::NodeId;

pub use amplify::{amplify_with_seed, privacy_amplify, AmplificationParams, CompressionRule};
pub use recon::{reconcile, ReconcileOutcome, ReconcileStatus, ReconciliationParams};

/// Ordered chain of participants. The first node transmits, the last receives,
/// interior nodes relay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub nodes: Vec<NodeId>,
}

impl Chain {
    pub fn new(nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::MalformedInput(format!(
                "chain needs at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        for (i, a) in nodes.iter().enumerate() {
            if nodes[i + 1..].contains(a) {
                return Err(Error::MalformedInput(format!("duplicate node {a} in chain")));
            }
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of transmission hops.
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Transmit/receive ability of a node, checked before the quantum phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCaps {
    pub can_transmit: bool,
    pub can_receive: bool,
}

impl NodeCaps {
    pub const DOUBLE_BOX: NodeCaps = NodeCaps {
        can_transmit: true,
        can_receive: true,
    };
}

/// Bases and observed bits of every chain member for one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: usize,
    pub bases: Vec<Basis>,
    pub bits: Vec<u8>,
}

/// An intercept/resend attacker pinned to one hop of the chain.
pub struct LinkAttack<'a> {
    /// Hop index: the attack sits between `nodes[hop]` and `nodes[hop + 1]`.
    pub hop: usize,
    /// Per-round probability of attacking.
    pub fraction: f64,
    pub rng: &'a mut RngStream,
}

/// Run the quantum phase: every round the first node draws a uniform basis and
/// bit and prepares a qubit; each interior node draws a basis and
/// intercepts/resends; the last node draws a basis and measures. Per-hop noise
/// is applied after each transmission, and the optional attacker acts on its
/// hop after that hop's noise.
pub fn run_quantum_phase(
    chain: &Chain,
    caps: &[NodeCaps],
    n_rounds: usize,
    hop_noise: &[NoiseModel],
    mut adversary: Option<LinkAttack<'_>>,
    node_rngs: &mut [RngStream],
) -> Result<Vec<RoundRecord>> {
    let k = chain.len();
    if caps.len() != k || node_rngs.len() != k {
        return Err(Error::MalformedInput(
            "capabilities and rng streams must match chain length".into(),
        ));
    }
    if hop_noise.len() != chain.hops() {
        return Err(Error::MalformedInput(format!(
            "expected {} hop noise entries, got {}",
            chain.hops(),
            hop_noise.len()
        )));
    }
    if !caps[0].can_transmit {
        return Err(Error::Capability(format!("{} cannot transmit", chain.nodes[0])));
    }
    if !caps[k - 1].can_receive {
        return Err(Error::Capability(format!("{} cannot receive", chain.nodes[k - 1])));
    }
    for pos in 1..k - 1 {
        if !caps[pos].can_transmit || !caps[pos].can_receive {
            return Err(Error::Capability(format!(
                "relay {} must both transmit and receive",
                chain.nodes[pos]
            )));
        }
    }
    if n_rounds == 0 {
        return Err(Error::MalformedInput("n_rounds must be at least 1".into()));
    }

    let mut records = Vec::with_capacity(n_rounds);
    for round_index in 0..n_rounds {
        let mut bases = Vec::with_capacity(k);
        let mut bits = Vec::with_capacity(k);

        let basis0 = Basis::random(&mut node_rngs[0]);
        let bit0 = node_rngs[0].draw_bit();
        bases.push(basis0);
        bits.push(bit0);
        let mut in_flight = prepare_qubit(basis0, bit0);

        for hop in 0..k - 1 {
            in_flight = apply_noise(in_flight, hop_noise[hop], &mut node_rngs[hop]);
            if let Some(attack) = adversary.as_mut() {
                if attack.hop == hop && attack.rng.draw_bool(attack.fraction) {
                    let eve_basis = Basis::random(attack.rng);
                    let (_, resent) = intercept_resend(in_flight, eve_basis, attack.rng);
                    in_flight = resent;
                }
            }
            let receiver = hop + 1;
            let basis = Basis::random(&mut node_rngs[receiver]);
            if receiver == k - 1 {
                let bit = measure_qubit(in_flight, basis, &mut node_rngs[receiver]);
                bases.push(basis);
                bits.push(bit);
            } else {
                let (bit, resent) = intercept_resend(in_flight, basis, &mut node_rngs[receiver]);
                bases.push(basis);
                bits.push(bit);
                in_flight = resent;
            }
        }

        records.push(RoundRecord {
            round_index,
            bases,
            bits,
        });
    }
    Ok(records)
}

/// A maximal run of adjacent equal bases within one round. The endpoints
/// `first` and `last` are the beneficiaries; positions strictly between them
/// also learn the bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeneficiaryRun {
    pub first: usize,
    pub last: usize,
}

impl BeneficiaryRun {
    pub fn pair(&self) -> (usize, usize) {
        (self.first, self.last)
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> {
        self.first + 1..self.last
    }

    pub fn contains(&self, position: usize) -> bool {
        (self.first..=self.last).contains(&position)
    }
}

/// Sifting result: per round, the disjoint beneficiary runs (empty = unusable
/// round).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub chain_len: usize,
    pub rounds: Vec<Vec<BeneficiaryRun>>,
}

impl GroupAssignment {
    pub fn is_unused(&self, round: usize) -> bool {
        self.rounds[round].is_empty()
    }

    pub fn usable_count(&self) -> usize {
        self.rounds.iter().filter(|runs| !runs.is_empty()).count()
    }

    /// Round indices contributing to each beneficiary pair, in round order.
    pub fn pair_rounds(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (round, runs) in self.rounds.iter().enumerate() {
            for run in runs {
                map.entry(run.pair()).or_default().push(round);
            }
        }
        map
    }

    /// Stable label describing a round's beneficiary structure, e.g.
    /// `(alice..bob)` or `(alice..carol-1)+(carol-2..bob)` or `unused`.
    pub fn round_signature(&self, round: usize, nodes: &[NodeId]) -> String {
        if self.rounds[round].is_empty() {
            return "unused".to_string();
        }
        self.rounds[round]
            .iter()
            .map(|run| format!("({}..{})", nodes[run.first], nodes[run.last]))
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Sift announced bases into beneficiary runs: every maximal run of adjacent
/// equal bases of length >= 2 yields its endpoints as a beneficiary pair.
pub fn sift(records: &[RoundRecord]) -> Result<GroupAssignment> {
    let Some(first) = records.first() else {
        return Err(Error::MalformedInput("no rounds to sift".into()));
    };
    let chain_len = first.bases.len();
    let mut rounds = Vec::with_capacity(records.len());
    for record in records {
        if record.bases.len() != chain_len || record.bits.len() != chain_len {
            return Err(Error::MalformedInput(format!(
                "round {} has inconsistent chain length",
                record.round_index
            )));
        }
        let mut runs = Vec::new();
        let mut start = 0;
        for pos in 1..=chain_len {
            if pos == chain_len || record.bases[pos] != record.bases[start] {
                if pos - start >= 2 {
                    runs.push(BeneficiaryRun {
                        first: start,
                        last: pos - 1,
                    });
                }
                start = pos;
            }
        }
        rounds.push(runs);
    }
    Ok(GroupAssignment { chain_len, rounds })
}

/// Result of sacrificing a random sample of key positions to estimate the
/// error rate. The sampled positions (and both sides' values there) become
/// public and are removed from the keys.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub qber: f64,
    pub remaining_a: Vec<u8>,
    pub remaining_b: Vec<u8>,
    pub disclosed: usize,
    pub positions: Vec<usize>,
    pub sample_a: Vec<u8>,
    pub sample_b: Vec<u8>,
}

pub fn estimate_qber(
    key_a: &[u8],
    key_b: &[u8],
    sample_fraction: f64,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if key_a.len() != key_b.len() {
        return Err(Error::MalformedInput(format!(
            "key lengths differ: {} vs {}",
            key_a.len(),
            key_b.len()
        )));
    }
    if !(sample_fraction > 0.0 && sample_fraction < 1.0) {
        return Err(Error::MalformedInput(format!(
            "sample_fraction {sample_fraction} outside (0, 1)"
        )));
    }
    let n = key_a.len();
    let sample_size = (n as f64 * sample_fraction).floor() as usize;
    if sample_size == 0 {
        return Err(Error::DegenerateSample(format!(
            "sample of {n} bits at fraction {sample_fraction} is empty"
        )));
    }
    let positions = rng.sample_positions(n, sample_size);
    let sample_a: Vec<u8> = positions.iter().map(|&p| key_a[p]).collect();
    let sample_b: Vec<u8> = positions.iter().map(|&p| key_b[p]).collect();
    let mismatches = hamming(&sample_a, &sample_b);

    let mut keep = vec![true; n];
    for &p in &positions {
        keep[p] = false;
    }
    let remaining_a = key_a
        .iter()
        .zip(&keep)
        .filter_map(|(&bit, &k)| k.then_some(bit))
        .collect();
    let remaining_b = key_b
        .iter()
        .zip(&keep)
        .filter_map(|(&bit, &k)| k.then_some(bit))
        .collect();

    Ok(Estimate {
        qber: mismatches as f64 / sample_size as f64,
        remaining_a,
        remaining_b,
        disclosed: sample_size,
        positions,
        sample_a,
        sample_b,
    })
}

/// A pairwise secret key surviving the full pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairKey {
    pub pair: (NodeId, NodeId),
    pub bits: Vec<u8>,
    #[serde(skip)]
    pub qber_estimate_raw: Option<f64>,
    pub qber_estimate: String,
    pub leakage_bits: u64,
}

impl PairKey {
    fn new(pair: (NodeId, NodeId), bits: Vec<u8>, qber: f64, leakage_bits: u64) -> Self {
        Self {
            pair,
            bits,
            qber_estimate_raw: Some(qber),
            qber_estimate: format!("{qber:.6}"),
            leakage_bits,
        }
    }

    pub fn qber(&self) -> f64 {
        self.qber_estimate_raw
            .unwrap_or_else(|| self.qber_estimate.parse().unwrap_or(0.0))
    }
}

/// Everything a beneficiary pair announces in public while turning raw bits
/// into a final key. An eavesdropper — or a cooperating relay — sees exactly
/// this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicDiscussion {
    /// Chain positions of the beneficiaries.
    pub pair: (usize, usize),
    pub estimation_positions: Vec<usize>,
    pub estimation_values_a: Vec<u8>,
    pub estimation_values_b: Vec<u8>,
    pub qber: f64,
    pub passes: Vec<PassAnnouncement>,
    pub parities: Vec<ParityDisclosure>,
    pub verification_a: String,
    pub verification_b: String,
    pub verification_ok: bool,
    pub amplification: Option<AmplificationAnnouncement>,
}

impl PublicDiscussion {
    pub fn new(pair: (usize, usize)) -> Self {
        Self {
            pair,
            estimation_positions: Vec::new(),
            estimation_values_a: Vec::new(),
            estimation_values_b: Vec::new(),
            qber: 0.0,
            passes: Vec::new(),
            parities: Vec::new(),
            verification_a: String::new(),
            verification_b: String::new(),
            verification_ok: false,
            amplification: None,
        }
    }
}

/// Block layout of one reconciliation pass: block size plus the announced
/// permutation seed (`None` = identity permutation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassAnnouncement {
    pub block_size: usize,
    pub perm_seed: Option<[u8; 32]>,
}

impl PassAnnouncement {
    /// Reconstruct the permutation: `shuffled[i] = key[perm[i]]`.
    pub fn permutation(&self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        if let Some(seed) = self.perm_seed {
            RngStream::from_seed32(seed).shuffle(&mut perm);
        }
        perm
    }
}

/// One disclosed parity comparison over `start..end` of a pass's shuffled key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityDisclosure {
    pub pass: usize,
    pub start: usize,
    pub end: usize,
    pub parity_a: u8,
    pub parity_b: u8,
}

/// Publicly announced amplification parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationAnnouncement {
    pub matrix_seed: [u8; 32],
    pub input_len: usize,
    pub output_len: usize,
    pub leakage_bits: u64,
    pub qber: f64,
}

/// Abstraction over the classical channel used for the public discussion.
/// `from`/`to` are chain positions. Implementations may authenticate, record,
/// tamper-check, or just count the exchanged messages; an error aborts the
/// session.
pub trait DiscussionChannel {
    fn exchange(&mut self, from: usize, to: usize, label: &str, payload: &[u8]) -> Result<()>;
}

/// Channel that delivers everything silently. Used for in-process runs and
/// tests that do not model the network.
pub struct NullChannel;

impl DiscussionChannel for NullChannel {
    fn exchange(&mut self, _from: usize, _to: usize, _label: &str, _payload: &[u8]) -> Result<()> {
        Ok(())
    }
}

/// Parameters for the estimation/reconciliation/amplification pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationParams {
    pub sample_fraction: f64,
    pub qber_abort_threshold: f64,
    pub recon: ReconciliationParams,
    pub amp: AmplificationParams,
}

impl Default for DerivationParams {
    fn default() -> Self {
        Self {
            sample_fraction: 0.25,
            qber_abort_threshold: 0.11,
            recon: ReconciliationParams::default(),
            amp: AmplificationParams::default(),
        }
    }
}

/// Exact bit bookkeeping for one pair, preserved for conservation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAccounting {
    pub raw_bits: usize,
    pub estimation_disclosed: usize,
    pub reconciliation_input: usize,
    pub leakage_bits: u64,
    pub amplification_input: usize,
    pub compression: usize,
    pub final_length: usize,
}

/// Outcome of the pipeline for one beneficiary pair.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub key: Option<PairKey>,
    pub failure: Option<FailureClass>,
    pub discussion: PublicDiscussion,
    pub accounting: PairAccounting,
    /// The reconciled (pre-amplification) key, kept for shadow-key analysis.
    pub reconciled_bits: Option<Vec<u8>>,
}

/// Run estimation, reconciliation, and amplification for every beneficiary
/// pair of the sifted rounds. Per-pair aborts (estimated error rate above
/// threshold, failed verification) are recorded on that pair only; channel
/// errors abort the whole derivation.
pub fn derive_pair_keys(
    chain: &Chain,
    records: &[RoundRecord],
    assignment: &GroupAssignment,
    params: &DerivationParams,
    stream_for: &mut dyn FnMut(&str) -> RngStream,
    channel: &mut dyn DiscussionChannel,
) -> Result<BTreeMap<(usize, usize), PairOutcome>> {
    if records.len() != assignment.rounds.len() || assignment.chain_len != chain.len() {
        return Err(Error::MalformedInput(
            "assignment does not match records and chain".into(),
        ));
    }
    let mut outcomes = BTreeMap::new();
    for (pair, rounds) in assignment.pair_rounds() {
        let (i, j) = pair;
        let pair_label = format!("{i}-{j}");
        let raw_a: Vec<u8> = rounds.iter().map(|&r| records[r].bits[i]).collect();
        let raw_b: Vec<u8> = rounds.iter().map(|&r| records[r].bits[j]).collect();
        let raw_bits = raw_a.len();
        let mut discussion = PublicDiscussion::new(pair);

        // Estimation: sampled positions and both sides' values go public.
        let estimate = estimate_qber(
            &raw_a,
            &raw_b,
            params.sample_fraction,
            &mut stream_for(&format!("est:{pair_label}")),
        )?;
        discussion.estimation_positions = estimate.positions.clone();
        discussion.estimation_values_a = estimate.sample_a.clone();
        discussion.estimation_values_b = estimate.sample_b.clone();
        discussion.qber = estimate.qber;
        channel.exchange(
            i,
            j,
            "estimation",
            &serde_json::to_vec(&(&estimate.positions, &estimate.sample_a)).expect("serialize"),
        )?;
        channel.exchange(j, i, "estimation-reply", &serde_json::to_vec(&estimate.sample_b).expect("serialize"))?;

        let mut accounting = PairAccounting {
            raw_bits,
            estimation_disclosed: estimate.disclosed,
            reconciliation_input: estimate.remaining_a.len(),
            leakage_bits: 0,
            amplification_input: 0,
            compression: 0,
            final_length: 0,
        };

        if estimate.qber > params.qber_abort_threshold {
            outcomes.insert(
                pair,
                PairOutcome {
                    key: None,
                    failure: Some(FailureClass::QberAbort),
                    discussion,
                    accounting,
                    reconciled_bits: None,
                },
            );
            continue;
        }

        // Reconciliation.
        let mut recon_rng = stream_for(&format!("recon:{pair_label}"));
        let outcome = reconcile(
            &estimate.remaining_a,
            &estimate.remaining_b,
            &params.recon,
            channel,
            pair,
            &mut recon_rng,
            &mut discussion,
        )?;
        accounting.leakage_bits = outcome.leakage_bits;
        let reconciled = match outcome.status {
            ReconcileStatus::Success(bits) => bits,
            ReconcileStatus::Abort => {
                outcomes.insert(
                    pair,
                    PairOutcome {
                        key: None,
                        failure: Some(FailureClass::ReconcileAbort),
                        discussion,
                        accounting,
                        reconciled_bits: None,
                    },
                );
                continue;
            }
        };

        // Amplification: the matrix seed is drawn once and announced.
        let mut amp_rng = stream_for(&format!("amp:{pair_label}"));
        let amplified = privacy_amplify(
            &reconciled,
            outcome.leakage_bits,
            estimate.qber,
            &params.amp,
            &mut amp_rng,
        );
        let announcement = AmplificationAnnouncement {
            matrix_seed: amplified.matrix_seed,
            input_len: reconciled.len(),
            output_len: amplified.bits.len(),
            leakage_bits: outcome.leakage_bits,
            qber: estimate.qber,
        };
        channel.exchange(
            i,
            j,
            "amplification",
            &serde_json::to_vec(&announcement).expect("serialize"),
        )?;
        discussion.amplification = Some(announcement);

        accounting.amplification_input = reconciled.len();
        accounting.compression = reconciled.len() - amplified.bits.len();
        accounting.final_length = amplified.bits.len();

        let key = PairKey::new(
            (chain.nodes[i].clone(), chain.nodes[j].clone()),
            amplified.bits,
            estimate.qber,
            outcome.leakage_bits,
        );
        outcomes.insert(
            pair,
            PairOutcome {
                key: Some(key),
                failure: None,
                discussion,
                accounting,
                reconciled_bits: Some(reconciled),
            },
        );
    }
    Ok(outcomes)
}

/// A relay's reconstruction of the endpoints' final key from the public
/// discussion plus its own raw bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowReconstruction {
    pub bits: Vec<u8>,
    /// Hamming distance to the true final key.
    pub distance: usize,
    /// Hamming distance of the relay's corrected raw key to the true
    /// reconciled key, before amplification.
    pub pre_amplification_distance: usize,
}

/// Replay the published discussion of beneficiary pair `discussion.pair` on
/// the raw bits of the relay at `relay_position`, which must lie strictly
/// inside every contributing run. The relay corrects its key toward the first
/// beneficiary's disclosed parities (the reconciled key equals that side's
/// key), applies the announced amplification matrix, and measures the
/// Hamming distance to the true final key.
pub fn carol_shadow_key(
    records: &[RoundRecord],
    assignment: &GroupAssignment,
    relay_position: usize,
    discussion: &PublicDiscussion,
    true_reconciled: &[u8],
    true_final: &[u8],
) -> Result<ShadowReconstruction> {
    let (i, j) = discussion.pair;
    if !(i < relay_position && relay_position < j) {
        return Err(Error::MalformedInput(format!(
            "relay position {relay_position} is not interior to pair ({i}, {j})"
        )));
    }
    let rounds = assignment
        .pair_rounds()
        .remove(&discussion.pair)
        .ok_or_else(|| Error::MalformedInput(format!("no rounds for pair ({i}, {j})")))?;
    let raw: Vec<u8> = rounds.iter().map(|&r| records[r].bits[relay_position]).collect();

    // Drop the publicly sampled estimation positions, as both owners did.
    let mut keep = vec![true; raw.len()];
    for &p in &discussion.estimation_positions {
        keep[p] = false;
    }
    let mut key: Vec<u8> = raw
        .iter()
        .zip(&keep)
        .filter_map(|(&bit, &k)| k.then_some(bit))
        .collect();
    let n = key.len();

    // Index the disclosed parities of the first beneficiary.
    let mut disclosed: BTreeMap<(usize, usize, usize), u8> = BTreeMap::new();
    for p in &discussion.parities {
        disclosed.insert((p.pass, p.start, p.end), p.parity_a);
    }
    let perms: Vec<Vec<usize>> = discussion.passes.iter().map(|p| p.permutation(n)).collect();

    // Sweep the passes repeatedly: a correction in a later pass can make an
    // earlier pass's disclosed parity actionable again. The loop is bounded;
    // each sweep either fixes at least one bit or stops.
    for _ in 0..discussion.passes.len().max(1) * 2 {
        let mut changed = false;
        for (pass_idx, pass) in discussion.passes.iter().enumerate() {
            let perm = &perms[pass_idx];
            let mut start = 0;
            while start < n {
                let end = (start + pass.block_size).min(n);
                if let Some(&parity_a) = disclosed.get(&(pass_idx, start, end)) {
                    let mine = block_parity(&key, perm, start, end);
                    if mine != parity_a {
                        if let Some(pos) =
                            bisect_with_disclosures(&key, perm, pass_idx, start, end, &disclosed)
                        {
                            key[perm[pos]] ^= 1;
                            changed = true;
                        }
                    }
                }
                start = end;
            }
        }
        if !changed {
            break;
        }
    }

    let pre_amplification_distance = hamming(&key, true_reconciled);
    let amp = discussion
        .amplification
        .as_ref()
        .ok_or_else(|| Error::MalformedInput("discussion carries no amplification".into()))?;
    let bits = amplify_with_seed(&key, amp.output_len, amp.matrix_seed);
    let distance = hamming(&bits, true_final);
    Ok(ShadowReconstruction {
        bits,
        distance,
        pre_amplification_distance,
    })
}

fn block_parity(key: &[u8], perm: &[usize], start: usize, end: usize) -> u8 {
    (start..end).fold(0u8, |acc, s| acc ^ key[perm[s]])
}

/// Descend a mismatched block using only parities that were actually
/// disclosed; returns the shuffled-space position to flip, or `None` when the
/// published discussion does not pin it down.
fn bisect_with_disclosures(
    key: &[u8],
    perm: &[usize],
    pass: usize,
    mut lo: usize,
    mut hi: usize,
    disclosed: &BTreeMap<(usize, usize, usize), u8>,
) -> Option<usize> {
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let &parity_a = disclosed.get(&(pass, lo, mid))?;
        if block_parity(key, perm, lo, mid) != parity_a {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(lo)
}

#[cfg(test)]
mod tests;

//! Synchronous-round simulator for constant-round unbounded fan-in
//! multiplication under a passive adversary.
//!
//! A trusted dealer preshares random nonzero blinding pairs [b_i],
//! [b_i⁻¹] (one round). The players then compute the blinded factors
//! [d_i] = [b_{i−1} x_i b_i⁻¹] — a single round when the scheme is
//! 3-multiplicative, two rounds of pairwise products when it is only
//! 2-multiplicative — open all d_i in one batch round, locally take
//! d = Π d_i = b_0 (Π x_i) b_l⁻¹, and in a final multiplication round
//! build [d · b_0⁻¹ · b_l], a sharing of the product. Totals: four
//! rounds with triples, five with pairs, independent of the fan-in.
//!
//! Multiplication itself is reshare-and-recombine: each player applies
//! the recombination witness to its local share products to get a
//! contribution t_i, reshares t_i, and everyone sums the received
//! shares — a sharing of Σ t_i, the product of the opened values.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::diamond::{multiplicativity_witness, DiamondError, RecombinationVector};
use crate::gf::FieldElement;
use crate::msp::{Msp, MspError, PlayerSet, ShareBundle};

/// Iteration budget for exhaustive privacy audits.
const AUDIT_CAP: u128 = 10_000_000;
/// Trials used by the seeded sampling audit fallback.
const AUDIT_TRIALS: usize = 500;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("field GF({0}) is too small: blinding needs at least two nonzero elements")]
    FieldTooSmall(u64),
    #[error("scheme has no {0}-fold recombination witness")]
    NoWitness(usize),
    #[error("no shared value registered under `{0}`")]
    UnknownName(String),
    #[error("set {0} is qualified: its view determines the secret by definition")]
    QualifiedSet(PlayerSet),
    #[error("state space too large for exhaustive audit; provide a seed for sampling")]
    EnumerationTooLarge,
    #[error(transparent)]
    Scheme(#[from] MspError),
    #[error(transparent)]
    Diamond(#[from] DiamondError),
}

/// Field elements sent from one party to another within a round.
/// Party 0 is the dealer; players are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// One synchronous round: its label, the traffic, and any values
/// opened at the round barrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub label: String,
    pub messages: Vec<Message>,
    pub opened: Vec<(String, u64)>,
}

/// Ordered record of every counted round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundLog {
    rounds: Vec<RoundRecord>,
}

impl RoundLog {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.rounds
    }

    /// Line-oriented trace: `round <k> <label>`, then `msg <from> <to>
    /// <count>` lines, then `open <name> <value>` lines.
    pub fn to_trace(&self) -> String {
        let mut out = String::new();
        for (k, record) in self.rounds.iter().enumerate() {
            out.push_str(&format!("round {} {}\n", k + 1, record.label));
            for m in &record.messages {
                out.push_str(&format!("msg {} {} {}\n", m.from, m.to, m.count));
            }
            for (name, value) in &record.opened {
                out.push_str(&format!("open {name} {value}\n"));
            }
        }
        out
    }
}

/// A running protocol instance: named shared values, a deterministic
/// randomness tape, and the round log. Sharing of protocol inputs is
/// uncounted (inputs are assumed predistributed); every synchronous
/// exchange increments the round count by exactly one.
pub struct ProtocolState<'a> {
    scheme: &'a Msp,
    rng: ChaCha20Rng,
    shared: BTreeMap<String, ShareBundle>,
    witnesses: HashMap<usize, Option<RecombinationVector>>,
    log: RoundLog,
}

impl<'a> ProtocolState<'a> {
    pub fn new(scheme: &'a Msp, seed: u64) -> ProtocolState<'a> {
        ProtocolState {
            scheme,
            rng: ChaCha20Rng::seed_from_u64(seed),
            shared: BTreeMap::new(),
            witnesses: HashMap::new(),
            log: RoundLog::default(),
        }
    }

    pub fn scheme(&self) -> &Msp {
        self.scheme
    }

    pub fn rounds(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &RoundLog {
        &self.log
    }

    pub fn into_log(self) -> RoundLog {
        self.log
    }

    fn register(&mut self, name: &str, bundle: ShareBundle) {
        let previous = self.shared.insert(name.to_string(), bundle);
        assert!(previous.is_none(), "shared value `{name}` already exists");
    }

    fn bundle(&self, name: &str) -> Result<&ShareBundle, SimError> {
        self.shared
            .get(name)
            .ok_or_else(|| SimError::UnknownName(name.to_string()))
    }

    fn fresh_sharing(&mut self, secret: u64) -> ShareBundle {
        let q = self.scheme.field().modulus();
        let mut coords = Vec::with_capacity(self.scheme.cols());
        coords.push(secret % q);
        for _ in 1..self.scheme.cols() {
            coords.push(self.rng.gen_range(0..q));
        }
        self.scheme.share_raw(&coords)
    }

    fn ensure_witness(&mut self, lambda: usize) -> Result<(), SimError> {
        if !self.witnesses.contains_key(&lambda) {
            let witness = multiplicativity_witness(self.scheme, lambda)?;
            self.witnesses.insert(lambda, witness);
        }
        match self.witnesses[&lambda] {
            Some(_) => Ok(()),
            None => Err(SimError::NoWitness(lambda)),
        }
    }

    /// Distributes a sharing of `value`. Not a counted round: protocol
    /// inputs are assumed to be in place before the clock starts.
    pub fn share_input(&mut self, name: &str, value: u64) {
        let bundle = self.fresh_sharing(value);
        self.register(name, bundle);
    }

    /// Dealer round: draws b_0, …, b_l uniformly from the nonzero
    /// elements and registers sharings of b_0..b_l then b_0⁻¹..b_l⁻¹,
    /// in that order. Returns the registered names.
    pub fn dealer_preprocess(&mut self, l: usize) -> Result<Vec<String>, SimError> {
        assert!(l >= 1, "need at least one factor");
        let field = self.scheme.field();
        let q = field.modulus();
        if q < 3 {
            return Err(SimError::FieldTooSmall(q));
        }
        let b: Vec<u64> = (0..=l).map(|_| self.rng.gen_range(1..q)).collect();
        let mut names = Vec::with_capacity(2 * (l + 1));
        for (i, &v) in b.iter().enumerate() {
            let name = format!("b{i}");
            let bundle = self.fresh_sharing(v);
            self.register(&name, bundle);
            names.push(name);
        }
        for (i, &v) in b.iter().enumerate() {
            let name = format!("binv{i}");
            let bundle = self.fresh_sharing(field.inv_raw(v).expect("nonzero by construction"));
            self.register(&name, bundle);
            names.push(name);
        }
        let per_bundle = self.scheme.block_sizes();
        let messages = (1..=self.scheme.players())
            .map(|j| Message {
                from: 0,
                to: j,
                count: 2 * (l + 1) * per_bundle[j - 1],
            })
            .collect();
        self.log.rounds.push(RoundRecord {
            label: "dealer-preprocess".to_string(),
            messages,
            opened: Vec::new(),
        });
        Ok(names)
    }

    /// One multiplication round covering any number of independent
    /// jobs: for each job every player recombines its local share
    /// products into a contribution, reshares it, and the received
    /// sharings are summed at the round barrier.
    pub fn multiply_batch(&mut self, jobs: &[(Vec<String>, String)]) -> Result<(), SimError> {
        assert!(!jobs.is_empty(), "a multiplication round needs a job");
        for (names, _) in jobs {
            assert!(names.len() >= 2, "a product needs at least two factors");
            for name in names {
                self.bundle(name)?;
            }
        }
        for (names, _) in jobs {
            self.ensure_witness(names.len())?;
        }
        let n = self.scheme.players();
        // local contributions t_i, per job then per player
        let mut contributions: Vec<Vec<u64>> = Vec::with_capacity(jobs.len());
        for (names, _) in jobs {
            let witness = self.witnesses[&names.len()]
                .as_ref()
                .expect("checked above");
            let bundles: Vec<&ShareBundle> = names
                .iter()
                .map(|name| self.shared.get(name).expect("checked above"))
                .collect();
            contributions.push(
                (1..=n)
                    .map(|i| witness.player_contribution(i, &bundles))
                    .collect(),
            );
        }
        // resharing: each contribution becomes a fresh sharing and the
        // outputs are the share-wise sums
        let field = self.scheme.field();
        let d = self.scheme.rows();
        for (job, (_, out)) in jobs.iter().enumerate() {
            let mut acc = vec![0u64; d];
            for i in 1..=n {
                let reshared = self.fresh_sharing(contributions[job][i - 1]);
                for (slot, &v) in acc.iter_mut().zip(reshared.by_row()) {
                    *slot = field.add_raw(*slot, v);
                }
            }
            let bundle = self.scheme.bundle_from_rows(acc);
            self.register(out, bundle);
        }
        let per_player = self.scheme.block_sizes();
        let mut messages = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    messages.push(Message {
                        from: i,
                        to: j,
                        count: jobs.len() * per_player[j - 1],
                    });
                }
            }
        }
        self.log.rounds.push(RoundRecord {
            label: "multiply".to_string(),
            messages,
            opened: Vec::new(),
        });
        Ok(())
    }

    /// Single-product convenience form of [`multiply_batch`](Self::multiply_batch).
    pub fn multiply_shared(&mut self, names: &[&str], out: &str) -> Result<(), SimError> {
        let job = (
            names.iter().map(|s| s.to_string()).collect(),
            out.to_string(),
        );
        self.multiply_batch(&[job])
    }

    /// One broadcast round opening any batch of shared values: every
    /// player sends all its shares of the named values to everyone.
    pub fn open_shared(&mut self, names: &[&str]) -> Result<Vec<FieldElement>, SimError> {
        assert!(!names.is_empty(), "an open round needs a value");
        let full = self.scheme.full_set();
        let mut opened = Vec::with_capacity(names.len());
        let mut values = Vec::with_capacity(names.len());
        for name in names {
            let bundle = self.bundle(name)?;
            let value = self.scheme.reconstruct(full, &bundle.restrict(full))?;
            opened.push((name.to_string(), value.value()));
            values.push(value);
        }
        let n = self.scheme.players();
        let per_player = self.scheme.block_sizes();
        let mut messages = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    messages.push(Message {
                        from: i,
                        to: j,
                        count: names.len() * per_player[i - 1],
                    });
                }
            }
        }
        self.log.rounds.push(RoundRecord {
            label: "open".to_string(),
            messages,
            opened,
        });
        Ok(values)
    }

    /// Local scaling by a public constant — free, no round.
    pub fn scale_local(&mut self, name: &str, factor: u64, out: &str) -> Result<(), SimError> {
        let field = self.scheme.field();
        let rows: Vec<u64> = self
            .bundle(name)?
            .by_row()
            .iter()
            .map(|&v| field.mul_raw(v, factor))
            .collect();
        let bundle = self.scheme.bundle_from_rows(rows);
        self.register(out, bundle);
        Ok(())
    }

    /// Reads a shared value out of the simulation without logging a
    /// round — an observer convenience, not a protocol step.
    pub fn peek(&self, name: &str) -> Result<FieldElement, SimError> {
        let full = self.scheme.full_set();
        let bundle = self.bundle(name)?;
        Ok(self.scheme.reconstruct(full, &bundle.restrict(full))?)
    }
}

/// Which multiplication depth drives the fan-in protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaninMode {
    /// Pairwise products only; the blinded factors take two rounds.
    Lambda2,
    /// Triple products; the blinded factors take one round.
    Lambda3,
}

/// Result of a full fan-in multiplication run.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    product: FieldElement,
    rounds: usize,
    log: RoundLog,
}

impl SimulationOutcome {
    pub fn product(&self) -> FieldElement {
        self.product
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn log(&self) -> &RoundLog {
        &self.log
    }

    pub fn into_log(self) -> RoundLog {
        self.log
    }
}

/// Runs the full blinded fan-in product of the given inputs: four
/// rounds in [`FaninMode::Lambda3`], five in [`FaninMode::Lambda2`],
/// independent of the number of factors.
pub fn simulate_fanin_product(
    scheme: &Msp,
    inputs: &[u64],
    mode: FaninMode,
    seed: u64,
) -> Result<SimulationOutcome, SimError> {
    assert!(!inputs.is_empty(), "need at least one factor");
    let field = scheme.field();
    let q = field.modulus();
    if q < 3 {
        return Err(SimError::FieldTooSmall(q));
    }
    let mut state = ProtocolState::new(scheme, seed);
    match mode {
        FaninMode::Lambda3 => {
            state.ensure_witness(3)?;
            state.ensure_witness(2)?; // final pairwise step
        }
        FaninMode::Lambda2 => state.ensure_witness(2)?,
    }
    let l = inputs.len();
    for (i, &x) in inputs.iter().enumerate() {
        state.share_input(&format!("x{}", i + 1), x);
    }
    state.dealer_preprocess(l)?;
    match mode {
        FaninMode::Lambda3 => {
            let jobs: Vec<(Vec<String>, String)> = (1..=l)
                .map(|i| {
                    (
                        vec![format!("b{}", i - 1), format!("x{i}"), format!("binv{i}")],
                        format!("d{i}"),
                    )
                })
                .collect();
            state.multiply_batch(&jobs)?;
        }
        FaninMode::Lambda2 => {
            let first: Vec<(Vec<String>, String)> = (1..=l)
                .map(|i| (vec![format!("b{}", i - 1), format!("x{i}")], format!("e{i}")))
                .collect();
            state.multiply_batch(&first)?;
            let second: Vec<(Vec<String>, String)> = (1..=l)
                .map(|i| (vec![format!("e{i}"), format!("binv{i}")], format!("d{i}")))
                .collect();
            state.multiply_batch(&second)?;
        }
    }
    let d_names: Vec<String> = (1..=l).map(|i| format!("d{i}")).collect();
    let d_refs: Vec<&str> = d_names.iter().map(|s| s.as_str()).collect();
    let opened = state.open_shared(&d_refs)?;
    let mut d = 1u64;
    for value in &opened {
        d = field.mul_raw(d, value.value());
    }
    let last_blinding = format!("b{l}");
    state.multiply_shared(&["binv0", last_blinding.as_str()], "t")?;
    state.scale_local("t", d, "result")?;
    let product = state.peek("result")?;
    let rounds = state.rounds();
    debug_assert_eq!(
        rounds,
        match mode {
            FaninMode::Lambda3 => 4,
            FaninMode::Lambda2 => 5,
        }
    );
    Ok(SimulationOutcome {
        product,
        rounds,
        log: state.into_log(),
    })
}

/// What part of the protocol a privacy audit covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditProtocol {
    /// Only the sharing step: the adversary's shares of one secret.
    ShareOnly,
    /// The fan-in protocol's leakage surface for the given number of
    /// factors: share secrecy plus the opened blinded values.
    FullFanin { factors: usize },
}

fn share_views_by_secret(
    scheme: &Msp,
    set: PlayerSet,
) -> Vec<BTreeMap<Vec<u64>, u64>> {
    let q = scheme.field().modulus();
    let l = scheme.cols();
    let rho_total = (q as u128).pow(l as u32 - 1) as u64;
    let mut per_secret = Vec::with_capacity(q as usize);
    for s in 0..q {
        let mut multiset: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for code in 0..rho_total {
            let mut coords = Vec::with_capacity(l);
            coords.push(s);
            let mut rem = code;
            for _ in 1..l {
                coords.push(rem % q);
                rem /= q;
            }
            let view = scheme.share_raw(&coords).restrict(set);
            *multiset.entry(view).or_insert(0) += 1;
        }
        per_secret.push(multiset);
    }
    per_secret
}

fn share_audit_exhaustive(scheme: &Msp, set: PlayerSet) -> bool {
    let per_secret = share_views_by_secret(scheme, set);
    per_secret.iter().all(|m| *m == per_secret[0])
}

fn share_audit_sampled(scheme: &Msp, set: PlayerSet, seed: u64) -> bool {
    use crate::linalg::solve;
    let field = scheme.field();
    let q = field.modulus();
    let l = scheme.cols();
    let sub = scheme.submatrix(set);
    let blinding_part = sub.drop_column(0);
    let secret_col = sub.column(0);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..AUDIT_TRIALS {
        let coords: Vec<u64> = (0..l).map(|_| rng.gen_range(0..q)).collect();
        let view = scheme.share_raw(&coords).restrict(set);
        // the observed view must be consistent with every other secret
        let mut alternatives: Vec<u64> = vec![0, 1];
        for _ in 0..8 {
            alternatives.push(rng.gen_range(0..q));
        }
        for s in alternatives {
            let rhs: Vec<u64> = view
                .iter()
                .zip(&secret_col)
                .map(|(&v, &c)| field.sub_raw(v, field.mul_raw(s, c)))
                .collect();
            if solve(&blinding_part, &rhs)
                .expect("view length matches the set's rows")
                .is_none()
            {
                return false;
            }
        }
    }
    true
}

fn blinded_tuple(field: crate::gf::PrimeField, xs: &[u64], bs: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let binv = field.inv_raw(bs[i + 1]).expect("nonzero");
        out.push(field.mul_raw(field.mul_raw(bs[i], x), binv));
    }
    out
}

/// Decodes `code` into `len` digits over the nonzero elements 1..q.
fn nonzero_digits(code: u64, len: usize, q: u64) -> Vec<u64> {
    let base = q - 1;
    let mut rem = code;
    (0..len)
        .map(|_| {
            let digit = rem % base + 1;
            rem /= base;
            digit
        })
        .collect()
}

fn opened_values_audit_exhaustive(scheme: &Msp, factors: usize) -> bool {
    let field = scheme.field();
    let q = field.modulus();
    let base = q - 1;
    let assignments = base.pow(factors as u32);
    let draws = base.pow(factors as u32 + 1);
    // multiset of opened (d_1..d_l) tuples over all dealer draws, per
    // honest assignment, grouped by the product the protocol reveals
    let mut by_product: HashMap<u64, Vec<BTreeMap<Vec<u64>, u64>>> = HashMap::new();
    for a in 0..assignments {
        let xs = nonzero_digits(a, factors, q);
        let product = xs.iter().fold(1u64, |acc, &x| field.mul_raw(acc, x));
        let mut multiset: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for code in 0..draws {
            let bs = nonzero_digits(code, factors + 1, q);
            *multiset.entry(blinded_tuple(field, &xs, &bs)).or_insert(0) += 1;
        }
        by_product.entry(product).or_default().push(multiset);
    }
    by_product
        .values()
        .all(|group| group.iter().all(|m| *m == group[0]))
}

fn opened_values_audit_sampled(scheme: &Msp, factors: usize, seed: u64) -> bool {
    let field = scheme.field();
    let q = field.modulus();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..AUDIT_TRIALS {
        let xs: Vec<u64> = (0..factors).map(|_| rng.gen_range(1..q)).collect();
        let bs: Vec<u64> = (0..=factors).map(|_| rng.gen_range(1..q)).collect();
        let observed = blinded_tuple(field, &xs, &bs);
        // any same-product assignment must be able to produce the same
        // opened tuple under some dealer draw
        let mut alt: Vec<u64> = (0..factors.saturating_sub(1))
            .map(|_| rng.gen_range(1..q))
            .collect();
        let product = xs.iter().fold(1u64, |acc, &x| field.mul_raw(acc, x));
        let prefix = alt.iter().fold(1u64, |acc, &x| field.mul_raw(acc, x));
        alt.push(field.mul_raw(product, field.inv_raw(prefix).expect("nonzero")));
        let mut alt_bs = Vec::with_capacity(factors + 1);
        alt_bs.push(rng.gen_range(1..q));
        for i in 0..factors {
            let tinv = field.inv_raw(observed[i]).expect("nonzero");
            alt_bs.push(field.mul_raw(field.mul_raw(tinv, alt_bs[i]), alt[i]));
        }
        if blinded_tuple(field, &alt, &alt_bs) != observed {
            return false;
        }
    }
    true
}

/// Verifies that the adversary set's protocol view is distributed
/// independently of the secrets: by exhaustive multiset comparison
/// when the state space fits the budget, by seeded consistency
/// sampling otherwise.
pub fn privacy_audit(
    scheme: &Msp,
    set: PlayerSet,
    protocol: AuditProtocol,
    seed: Option<u64>,
) -> Result<bool, SimError> {
    if scheme.is_qualified(set) {
        return Err(SimError::QualifiedSet(set));
    }
    let q = scheme.field().modulus() as u128;
    match protocol {
        AuditProtocol::ShareOnly => {
            let cost = q.checked_pow(scheme.cols() as u32);
            match (cost, seed) {
                (Some(c), _) if c <= AUDIT_CAP => Ok(share_audit_exhaustive(scheme, set)),
                (_, Some(seed)) => Ok(share_audit_sampled(scheme, set, seed)),
                (_, None) => Err(SimError::EnumerationTooLarge),
            }
        }
        AuditProtocol::FullFanin { factors } => {
            assert!(factors >= 1, "need at least one factor");
            if scheme.field().modulus() < 3 {
                return Err(SimError::FieldTooSmall(scheme.field().modulus()));
            }
            let share_ok = privacy_audit(
                scheme,
                set,
                AuditProtocol::ShareOnly,
                seed.map(|s| s.wrapping_add(1)),
            )?;
            if !share_ok {
                return Ok(false);
            }
            let cost = (q - 1).checked_pow(2 * factors as u32 + 1);
            match (cost, seed) {
                (Some(c), _) if c <= AUDIT_CAP => {
                    Ok(opened_values_audit_exhaustive(scheme, factors))
                }
                (_, Some(seed)) => Ok(opened_values_audit_sampled(scheme, factors, seed)),
                (_, None) => Err(SimError::EnumerationTooLarge),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{fixture, shamir_msp, Fixture};
    use crate::gf::PrimeField;

    fn threshold_4_of_11() -> Msp {
        shamir_msp(1, 4, 11, None).unwrap()
    }

    #[test]
    fn dealer_round_registers_blinding_pairs_multiplying_to_one() {
        let scheme = shamir_msp(1, 3, 7, None).unwrap();
        let mut state = ProtocolState::new(&scheme, 42);
        let names = state.dealer_preprocess(2).unwrap();
        assert_eq!(
            names,
            vec!["b0", "b1", "b2", "binv0", "binv1", "binv2"]
        );
        assert_eq!(state.rounds(), 1);
        let field = scheme.field();
        for i in 0..=2 {
            let b = state.peek(&format!("b{i}")).unwrap().value();
            let binv = state.peek(&format!("binv{i}")).unwrap().value();
            assert_ne!(b, 0);
            assert_eq!(field.mul_raw(b, binv), 1);
        }
        let record = &state.log().records()[0];
        assert_eq!(record.label, "dealer-preprocess");
        // 6 bundles of one share each, dealer to every player
        assert_eq!(record.messages.len(), 3);
        for (j, m) in record.messages.iter().enumerate() {
            assert_eq!((m.from, m.to, m.count), (0, j + 1, 6));
        }
    }

    #[test]
    fn binary_fields_cannot_blind() {
        let scheme = fixture(Fixture::M);
        let mut state = ProtocolState::new(&scheme, 1);
        assert_eq!(
            state.dealer_preprocess(1).unwrap_err(),
            SimError::FieldTooSmall(2)
        );
    }

    #[test]
    fn single_factor_preprocess_registers_four_bundles() {
        let scheme = shamir_msp(1, 3, 5, None).unwrap();
        let mut state = ProtocolState::new(&scheme, 9);
        let names = state.dealer_preprocess(1).unwrap();
        assert_eq!(names.len(), 4);
    }

    #[test]
    fn pairwise_product_opens_to_the_product() {
        let scheme = threshold_4_of_11();
        let mut state = ProtocolState::new(&scheme, 5);
        state.share_input("x", 3);
        state.share_input("y", 5);
        state.multiply_shared(&["x", "y"], "xy").unwrap();
        assert_eq!(state.rounds(), 1);
        let opened = state.open_shared(&["xy"]).unwrap();
        assert_eq!(opened[0].value(), 4); // 15 mod 11
        assert_eq!(state.rounds(), 2);
    }

    #[test]
    fn multiplying_by_a_shared_one_is_identity() {
        let scheme = threshold_4_of_11();
        let mut state = ProtocolState::new(&scheme, 6);
        state.share_input("x", 7);
        state.share_input("one", 1);
        state.multiply_shared(&["x", "one"], "x1").unwrap();
        assert_eq!(state.peek("x1").unwrap().value(), 7);
    }

    #[test]
    fn triple_product_takes_one_round() {
        let scheme = threshold_4_of_11();
        let mut state = ProtocolState::new(&scheme, 7);
        state.share_input("a", 2);
        state.share_input("b", 3);
        state.share_input("c", 4);
        state.multiply_shared(&["a", "b", "c"], "abc").unwrap();
        assert_eq!(state.rounds(), 1);
        assert_eq!(state.peek("abc").unwrap().value(), 2); // 24 mod 11
    }

    #[test]
    fn missing_witness_and_unknown_names_are_rejected() {
        // 3 points cannot support a 3-fold witness
        let scheme = shamir_msp(1, 3, 7, None).unwrap();
        let mut state = ProtocolState::new(&scheme, 8);
        state.share_input("a", 1);
        state.share_input("b", 2);
        state.share_input("c", 3);
        assert_eq!(
            state.multiply_shared(&["a", "b", "c"], "abc").unwrap_err(),
            SimError::NoWitness(3)
        );
        assert_eq!(
            state.multiply_shared(&["a", "nope"], "x").unwrap_err(),
            SimError::UnknownName("nope".to_string())
        );
        assert_eq!(
            state.open_shared(&["nope"]).unwrap_err(),
            SimError::UnknownName("nope".to_string())
        );
    }

    #[test]
    fn opening_is_a_single_round_for_any_batch() {
        let scheme = threshold_4_of_11();
        let mut state = ProtocolState::new(&scheme, 10);
        state.share_input("u", 5);
        state.share_input("v", 6);
        state.share_input("w", 7);
        let values = state.open_shared(&["u", "v", "w"]).unwrap();
        assert_eq!(
            values.iter().map(|v| v.value()).collect::<Vec<_>>(),
            vec![5, 6, 7]
        );
        assert_eq!(state.rounds(), 1);
        let record = &state.log().records()[0];
        assert_eq!(record.label, "open");
        assert_eq!(record.opened.len(), 3);
        assert_eq!(record.messages.len(), 4 * 3); // all ordered pairs
        assert!(record.messages.iter().all(|m| m.count == 3));
    }

    #[test]
    fn opened_blinded_values_match_the_dealer_transcript() {
        let scheme = shamir_msp(1, 4, 7, None).unwrap();
        let inputs = [2u64, 3, 5];
        let mut state = ProtocolState::new(&scheme, 77);
        for (i, &x) in inputs.iter().enumerate() {
            state.share_input(&format!("x{}", i + 1), x);
        }
        state.dealer_preprocess(3).unwrap();
        let field = scheme.field();
        let b: Vec<u64> = (0..=3)
            .map(|i| state.peek(&format!("b{i}")).unwrap().value())
            .collect();
        let jobs: Vec<(Vec<String>, String)> = (1..=3)
            .map(|i| {
                (
                    vec![format!("b{}", i - 1), format!("x{i}"), format!("binv{i}")],
                    format!("d{i}"),
                )
            })
            .collect();
        state.multiply_batch(&jobs).unwrap();
        let opened = state.open_shared(&["d1", "d2", "d3"]).unwrap();
        for i in 1..=3usize {
            let expected = field.mul_raw(
                field.mul_raw(b[i - 1], inputs[i - 1]),
                field.inv_raw(b[i]).unwrap(),
            );
            assert_eq!(opened[i - 1].value(), expected, "d{i}");
        }
    }

    #[test]
    fn fanin_product_runs_in_four_rounds_with_triples() {
        let outcome =
            simulate_fanin_product(&threshold_4_of_11(), &[2, 3, 4], FaninMode::Lambda3, 1)
                .unwrap();
        assert_eq!(outcome.product().value(), 2); // 24 mod 11
        assert_eq!(outcome.rounds(), 4);
        let labels: Vec<&str> = outcome
            .log()
            .records()
            .iter()
            .map(|r| r.label.as_str())
            .collect();
        assert_eq!(labels, vec!["dealer-preprocess", "multiply", "open", "multiply"]);
    }

    #[test]
    fn fanin_product_runs_in_five_rounds_with_pairs() {
        let outcome =
            simulate_fanin_product(&threshold_4_of_11(), &[2, 3, 4], FaninMode::Lambda2, 1)
                .unwrap();
        assert_eq!(outcome.product().value(), 2);
        assert_eq!(outcome.rounds(), 5);
        let labels: Vec<&str> = outcome
            .log()
            .records()
            .iter()
            .map(|r| r.label.as_str())
            .collect();
        assert_eq!(
            labels,
            vec!["dealer-preprocess", "multiply", "multiply", "open", "multiply"]
        );
    }

    #[test]
    fn zero_factors_pass_through_the_blinded_pipeline() {
        let scheme = shamir_msp(1, 4, 7, None).unwrap();
        for mode in [FaninMode::Lambda3, FaninMode::Lambda2] {
            let outcome = simulate_fanin_product(&scheme, &[3, 0, 2], mode, 3).unwrap();
            assert_eq!(outcome.product().value(), 0);
            assert_eq!(
                outcome.rounds(),
                if mode == FaninMode::Lambda3 { 4 } else { 5 }
            );
        }
    }

    #[test]
    fn fanin_product_is_correct_for_all_small_inputs() {
        let scheme = shamir_msp(1, 4, 5, None).unwrap();
        for l in 1..=3usize {
            let total = 5u64.pow(l as u32);
            for code in 0..total {
                let mut rem = code;
                let inputs: Vec<u64> = (0..l)
                    .map(|_| {
                        let d = rem % 5;
                        rem /= 5;
                        d
                    })
                    .collect();
                let expected = inputs.iter().fold(1u64, |acc, &x| acc * x % 5);
                for mode in [FaninMode::Lambda2, FaninMode::Lambda3] {
                    let outcome =
                        simulate_fanin_product(&scheme, &inputs, mode, code).unwrap();
                    assert_eq!(outcome.product().value(), expected, "{inputs:?} {mode:?}");
                }
            }
        }
    }

    #[test]
    fn fanin_product_matches_on_random_wide_cases() {
        use rand::Rng;
        let scheme = threshold_4_of_11();
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        for case in 0..200 {
            let l = rng.gen_range(2..=6);
            let inputs: Vec<u64> = (0..l).map(|_| rng.gen_range(0..11)).collect();
            let expected = inputs.iter().fold(1u64, |acc, &x| acc * x % 11);
            let mode = if case % 2 == 0 {
                FaninMode::Lambda3
            } else {
                FaninMode::Lambda2
            };
            let outcome = simulate_fanin_product(&scheme, &inputs, mode, case).unwrap();
            assert_eq!(outcome.product().value(), expected);
            assert_eq!(
                outcome.rounds(),
                if mode == FaninMode::Lambda3 { 4 } else { 5 },
                "round count must not depend on fan-in {l}"
            );
        }
    }

    #[test]
    fn identical_seeds_reproduce_identical_traces() {
        let scheme = threshold_4_of_11();
        let a = simulate_fanin_product(&scheme, &[2, 3, 4, 5], FaninMode::Lambda3, 99).unwrap();
        let b = simulate_fanin_product(&scheme, &[2, 3, 4, 5], FaninMode::Lambda3, 99).unwrap();
        assert_eq!(a.log().to_trace(), b.log().to_trace());
        assert!(!a.log().to_trace().is_empty());
    }

    #[test]
    fn trace_format_is_line_oriented() {
        let scheme = shamir_msp(1, 4, 5, None).unwrap();
        let outcome = simulate_fanin_product(&scheme, &[2, 3], FaninMode::Lambda3, 4).unwrap();
        let trace = outcome.log().to_trace();
        assert!(trace.starts_with("round 1 dealer-preprocess\nmsg 0 1 "));
        assert!(trace.contains("\nround 3 open\n"));
        assert!(trace.contains("\nopen d1 "));
        assert!(trace.contains("\nopen d2 "));
        assert!(trace.ends_with('\n'));
        for line in trace.lines() {
            assert!(
                line.starts_with("round ")
                    || line.starts_with("msg ")
                    || line.starts_with("open ")
            );
        }
    }

    #[test]
    fn blinded_openings_are_uniform_over_dealer_draws() {
        // For fixed nonzero inputs, every opened tuple in (F_5*)^l is
        // hit by exactly q-1 of the (q-1)^(l+1) dealer draws.
        let field = PrimeField::new(5).unwrap();
        let xs = [2u64, 3];
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for code in 0..(4u64.pow(3)) {
            let bs = nonzero_digits(code, 3, 5);
            *counts.entry(blinded_tuple(field, &xs, &bs)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 16);
        assert!(counts.values().all(|&c| c == 4));
    }

    #[test]
    fn share_audit_passes_for_unqualified_sets() {
        let scheme = fixture(Fixture::M);
        assert!(privacy_audit(
            &scheme,
            PlayerSet::from_players(&[1, 3]),
            AuditProtocol::ShareOnly,
            None
        )
        .unwrap());

        let shamir = shamir_msp(1, 3, 5, None).unwrap();
        assert!(privacy_audit(
            &shamir,
            PlayerSet::singleton(2),
            AuditProtocol::ShareOnly,
            None
        )
        .unwrap());
    }

    #[test]
    fn share_audit_covers_every_maximal_adversary_set() {
        let scheme = fixture(Fixture::MPrime);
        for &set in scheme.maximal_adversary_structure().unwrap().sets() {
            assert!(
                privacy_audit(&scheme, set, AuditProtocol::ShareOnly, None).unwrap(),
                "{set}"
            );
        }
    }

    #[test]
    fn qualified_sets_are_rejected_by_the_audit() {
        let scheme = shamir_msp(1, 3, 5, None).unwrap();
        let err = privacy_audit(
            &scheme,
            PlayerSet::from_players(&[1, 2]),
            AuditProtocol::ShareOnly,
            None,
        )
        .unwrap_err();
        assert_eq!(err, SimError::QualifiedSet(PlayerSet::from_players(&[1, 2])));
    }

    #[test]
    fn full_fanin_audit_passes_at_enumerable_scale() {
        let scheme = shamir_msp(1, 4, 5, None).unwrap();
        assert!(privacy_audit(
            &scheme,
            PlayerSet::singleton(3),
            AuditProtocol::FullFanin { factors: 2 },
            None
        )
        .unwrap());
        assert!(privacy_audit(
            &scheme,
            PlayerSet::singleton(1),
            AuditProtocol::FullFanin { factors: 3 },
            None
        )
        .unwrap());
    }

    #[test]
    fn oversized_audits_need_a_seed() {
        let scheme = shamir_msp(1, 4, 2147483647, None).unwrap();
        let set = PlayerSet::singleton(2);
        assert_eq!(
            privacy_audit(&scheme, set, AuditProtocol::ShareOnly, None).unwrap_err(),
            SimError::EnumerationTooLarge
        );
        assert!(privacy_audit(&scheme, set, AuditProtocol::ShareOnly, Some(5)).unwrap());
        assert!(privacy_audit(
            &scheme,
            set,
            AuditProtocol::FullFanin { factors: 3 },
            Some(5)
        )
        .unwrap());
    }
}

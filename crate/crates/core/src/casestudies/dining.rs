use rand::{Rng, RngCore};

use super::{decimal, formula, invalid, labels, ConfigError, Props};
use crate::dtmc::{LabelSet, ModelSampler};
use crate::logic::Formula;

/// Who pays for dinner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payer {
    Nsa,
    /// A cryptographer drawn uniformly at the first step.
    Uniform,
    /// Cryptographer with this zero-based seat.
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiningConfig {
    pub cryptographers: usize,
    pub payer: Payer,
    /// Zero-based seats of two neighbors whose shared coin is observed.
    pub secret_pair: (usize, usize),
}

impl Default for DiningConfig {
    fn default() -> Self {
        Self {
            cryptographers: 3,
            payer: Payer::Uniform,
            secret_pair: (0, 1),
        }
    }
}

impl DiningConfig {
    pub fn new(cryptographers: usize) -> Self {
        Self {
            cryptographers,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let n = self.cryptographers;
        if n < 3 {
            return invalid(format!("need at least 3 cryptographers, got {n}"));
        }
        if let Payer::Fixed(i) = self.payer {
            if i >= n {
                return invalid(format!("payer {i} is not seated at a table of {n}"));
            }
        }
        let (i, j) = self.secret_pair;
        if i >= n || j >= n {
            return invalid(format!("secret pair ({i}, {j}) out of range for {n} seats"));
        }
        if i == j {
            return invalid("secret pair needs two different cryptographers");
        }
        if (i + 1) % n != j && (j + 1) % n != i {
            return invalid(format!("cryptographers {i} and {j} are not neighbors and share no coin"));
        }
        Ok(())
    }

    /// Index of the coin shared by the secret pair. Coin `k` is tossed by
    /// cryptographer `k` and shown to its right neighbor `k + 1`.
    fn secret_coin(&self) -> usize {
        let (i, j) = self.secret_pair;
        if (i + 1) % self.cryptographers == j {
            i
        } else {
            j
        }
    }
}

/// Announcements of one round, `true` meaning "disagree".
///
/// Cryptographer `k` compares its own coin with the one of its left
/// neighbor and inverts the answer if it paid.
pub fn announcements(coins: &[bool], payer: Option<usize>) -> Vec<bool> {
    let n = coins.len();
    (0..n)
        .map(|k| {
            let left = coins[(k + n - 1) % n];
            (coins[k] != left) ^ (payer == Some(k))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiningState {
    stage: usize,
    payer: Option<usize>,
    coins: Vec<bool>,
    parity: bool,
}

impl DiningState {
    pub fn payer(&self) -> Option<usize> {
        self.payer
    }

    pub fn coins(&self) -> &[bool] {
        &self.coins
    }

    /// XOR of the announcements made so far.
    pub fn parity(&self) -> bool {
        self.parity
    }
}

/// One protocol round: the payer is fixed at step 1, all coins are tossed
/// at step 2, and cryptographer `k` announces at step `3 + k`. The state
/// after the last announcement is absorbing and carries `Paid` when the
/// announcements XOR to one.
#[derive(Debug, Clone)]
pub struct DiningModel {
    cfg: DiningConfig,
    props: Props,
    coin: usize,
    secret: String,
}

impl DiningModel {
    pub fn new(cfg: DiningConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let n = cfg.cryptographers;
        let (i, j) = cfg.secret_pair;
        let secret = format!("S{}_{}", i + 1, j + 1);
        let mut names: Vec<String> = (0..=n).map(|k| format!("C{k}")).collect();
        names.push(secret.clone());
        names.push(format!("N{secret}"));
        names.push("Paid".into());
        Ok(Self {
            coin: cfg.secret_coin(),
            props: Props::new(names),
            secret,
            cfg,
        })
    }

    pub fn config(&self) -> &DiningConfig {
        &self.cfg
    }

    /// Steps until the absorbing state.
    pub fn horizon(&self) -> usize {
        self.cfg.cryptographers + 2
    }

    /// Proposition holding once the shared coin came up heads.
    pub fn secret_label(&self) -> &str {
        &self.secret
    }

    /// The four-way approximate equality chain over the two coin outcomes.
    ///
    /// The tails outcome has its own proposition, `N` followed by the secret
    /// name. Negating the heads proposition instead would also hold before
    /// the toss and make the first term the plain probability of `Paid`.
    pub fn formula(&self, eps: f64) -> Formula {
        let s = &self.secret;
        let e = decimal(eps);
        let term = |k: usize, lit: &str| format!("P[p{k}](F ({lit}@p{k} & F Paid@p{k}))");
        formula(&format!(
            "{} ~[{e}] {} ~[{e}] {} ~[{e}] {}",
            term(1, &format!("N{s}")),
            term(2, s),
            term(3, &format!("N{s}")),
            term(4, s),
        ))
    }
}

impl ModelSampler for DiningModel {
    type State = DiningState;

    fn initial_state(&self) -> DiningState {
        DiningState {
            stage: 0,
            payer: None,
            coins: Vec::new(),
            parity: false,
        }
    }

    fn advance<R: RngCore + ?Sized>(&self, state: &mut DiningState, rng: &mut R) {
        let n = self.cfg.cryptographers;
        match state.stage {
            0 => {
                state.payer = match self.cfg.payer {
                    Payer::Nsa => None,
                    Payer::Uniform => Some(rng.random_range(0..n)),
                    Payer::Fixed(i) => Some(i),
                }
            }
            1 => state.coins = (0..n).map(|_| rng.random::<bool>()).collect(),
            s if s < n + 2 => {
                let k = s - 2;
                let left = state.coins[(k + n - 1) % n];
                state.parity ^= (state.coins[k] != left) ^ (state.payer == Some(k));
            }
            _ => return,
        }
        state.stage += 1;
    }

    fn labels(&self, state: &DiningState) -> LabelSet {
        let n = self.cfg.cryptographers;
        let mut ids = Vec::with_capacity(3);
        if state.stage >= 1 {
            ids.push(state.payer.map_or(0, |k| k as u32 + 1));
        }
        if state.stage >= 2 {
            let heads = state.coins[self.coin];
            ids.push(n as u32 + 1 + u32::from(!heads));
        }
        if state.stage == n + 2 && state.parity {
            ids.push(n as u32 + 3);
        }
        labels(ids)
    }

    fn propositions(&self) -> &[String] {
        &self.props.names
    }
}

use super::{AutomatonError, FiniteRewardAutomaton, Symbol};

/// A complete DFA over the combined label/reward alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    num_states: usize,
    initial: usize,
    alphabet: Vec<Symbol>,
    delta: Vec<usize>,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn from_fn<F>(
        num_states: usize,
        initial: usize,
        alphabet: impl IntoIterator<Item = Symbol>,
        accepting: Vec<bool>,
        mut delta: F,
    ) -> Result<Self, AutomatonError>
    where
        F: FnMut(usize, Symbol) -> usize,
    {
        if num_states == 0 {
            return Err(AutomatonError::NoStates);
        }
        if initial >= num_states {
            return Err(AutomatonError::StateOutOfRange { state: initial, num_states });
        }
        if accepting.len() != num_states {
            return Err(AutomatonError::Malformed(format!(
                "accepting vector has {} entries for {num_states} states",
                accepting.len()
            )));
        }
        let mut alphabet: Vec<Symbol> = alphabet.into_iter().collect();
        alphabet.sort();
        alphabet.dedup();
        let mut table = Vec::with_capacity(num_states * alphabet.len());
        for v in 0..num_states {
            for &s in &alphabet {
                let n = delta(v, s);
                if n >= num_states {
                    return Err(AutomatonError::StateOutOfRange { state: n, num_states });
                }
                table.push(n);
            }
        }
        Ok(Dfa { num_states, initial, alphabet, delta: table, accepting })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn symbol_index(&self, symbol: Symbol) -> Option<usize> {
        self.alphabet.binary_search(&symbol).ok()
    }

    pub fn next(&self, state: usize, symbol: Symbol) -> Option<usize> {
        self.symbol_index(symbol).map(|i| self.delta[state * self.alphabet.len() + i])
    }

    pub fn accepts(&self, word: &[Symbol]) -> Result<bool, AutomatonError> {
        let mut v = self.initial;
        for &s in word {
            v = self.next(v, s).ok_or(AutomatonError::UnknownSymbol(s))?;
        }
        Ok(self.accepting[v])
    }
}

/// Converts a reward automaton to the DFA accepting exactly its input/output
/// behaviour. State `|A|` is the rejecting sink.
pub fn mealy_to_dfa(fra: &FiniteRewardAutomaton) -> Dfa {
    let sink = fra.num_states();
    let alphabet: Vec<Symbol> = fra
        .input_alphabet()
        .iter()
        .flat_map(|&l| fra.reward_alphabet().iter().map(move |&r| Symbol::new(l, r)))
        .collect();
    let mut accepting = vec![true; sink + 1];
    accepting[sink] = false;
    Dfa::from_fn(sink + 1, fra.initial(), alphabet, accepting, |v, s| {
        if v == sink {
            return sink;
        }
        match fra.step(v, s.label) {
            Ok((n, r)) if r == s.reward => n,
            _ => sink,
        }
    })
    .expect("conversion of a well-formed automaton")
}

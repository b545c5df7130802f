//! Shared fixtures for the integration suites: an independent greedy
//! decomposition oracle that works on display-name strings, and a small
//! standalone RNG for drawing test samples.
#![allow(dead_code)]

use std::collections::BTreeSet;

/// The 26 combined constructs, listed here in plain ascending order; the
/// oracle derives its own visiting order from the names alone.
pub const COMBINED_AUS: [&[u32]; 26] = [
    &[1, 2],
    &[1, 2, 4],
    &[1, 4],
    &[6, 7, 12],
    &[6, 12],
    &[6, 12, 15],
    &[6, 12, 15, 17],
    &[6, 12, 17, 23],
    &[7, 12],
    &[10, 14],
    &[10, 15],
    &[10, 15, 17],
    &[10, 17],
    &[10, 17, 23],
    &[12, 15],
    &[12, 15, 17],
    &[12, 17],
    &[12, 17, 23],
    &[12, 23],
    &[12, 24],
    &[14, 17],
    &[14, 23],
    &[15, 17],
    &[15, 23],
    &[17, 23],
    &[17, 24],
];

/// Renders a construct name: `"AU1 and AU2"`, `"AU6, AU12 and AU15"`.
pub fn display_name(aus: &[u32]) -> String {
    match aus {
        [] => String::new(),
        [only] => format!("AU{only}"),
        [head @ .., last] => {
            let head = head
                .iter()
                .map(|au| format!("AU{au}"))
                .collect::<Vec<_>>()
                .join(", ");
            format!("{head} and AU{last}")
        }
    }
}

/// Recovers the AU numbers from a display name by textual surgery.
fn simplify(key: &str) -> Vec<u32> {
    key.replace("and", ",")
        .replace(' ', "")
        .split(',')
        .filter(|token| !token.is_empty())
        .map(|token| token.trim_start_matches("AU").parse().unwrap())
        .collect()
}

/// Greedy decomposition oracle operating purely on name strings.
///
/// Combined names are visited from most AU mentions to fewest, ties in
/// ascending AU order. A claimed name of 3 or more AUs removes its AUs
/// at once; a claimed pair only marks them for removal after the scan.
/// Leftover AUs become individual names, ascending.
pub fn oracle_decompose(active_input: &BTreeSet<u32>) -> Vec<Vec<u32>> {
    let mut keys: Vec<String> = COMBINED_AUS.iter().map(|aus| display_name(aus)).collect();
    keys.sort_by(|a, b| {
        let mentions_a = a.matches("AU").count();
        let mentions_b = b.matches("AU").count();
        mentions_b
            .cmp(&mentions_a)
            .then_with(|| simplify(a).cmp(&simplify(b)))
    });

    let mut active = active_input.clone();
    let mut remove_set: BTreeSet<u32> = BTreeSet::new();
    let mut result: Vec<Vec<u32>> = Vec::new();
    for key in &keys {
        let aus = simplify(key);
        if aus.iter().all(|au| active.contains(au)) {
            result.push(aus.clone());
            if aus.len() > 2 {
                for au in &aus {
                    active.remove(au);
                }
            } else {
                remove_set.extend(aus.iter().copied());
            }
        }
    }
    for au in &remove_set {
        active.remove(au);
    }
    for au in &active {
        result.push(vec![*au]);
    }
    result
}

/// xorshift64* generator for test sampling; unrelated to the library's
/// own seeding.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }
}

#[test]
fn oracle_handles_the_two_removal_regimes() {
    let deferred: BTreeSet<u32> = [12, 15, 23].into_iter().collect();
    assert_eq!(
        oracle_decompose(&deferred),
        vec![vec![12, 15], vec![12, 23], vec![15, 23]]
    );

    let immediate: BTreeSet<u32> = [10, 15, 17].into_iter().collect();
    assert_eq!(oracle_decompose(&immediate), vec![vec![10, 15, 17]]);
}

#[test]
fn oracle_passes_leftovers_through_as_individuals() {
    let active: BTreeSet<u32> = [4, 24].into_iter().collect();
    assert_eq!(oracle_decompose(&active), vec![vec![4], vec![24]]);
}

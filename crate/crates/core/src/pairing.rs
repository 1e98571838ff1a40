//! Enumeration of the delta-function pairings between output and input
//! photon slots that appear in the propagator expansion.

use crate::linalg::C64;

/// One term of the pairing expansion: `k` output/input slot pairs contracted
/// by delta functions, the rest left for a Green's function.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingTerm {
    pub k: usize,
    /// `(output slot, input slot)`.
    pub pairs: Vec<(usize, usize)>,
    pub unpaired_out: Vec<usize>,
    pub unpaired_in: Vec<usize>,
    /// `(-i)^(M + N - 2k)`.
    pub coefficient: C64,
}

/// `(-i)^p`.
pub fn minus_i_pow(p: usize) -> C64 {
    match p % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// All partial matchings between output slots (channels `out_channels`) and
/// input slots (channels `in_channels`) that pair equal channels only.
///
/// With a single channel the count is `sum_k C(N,k) C(M,k) k!`.
pub fn enumerate_pairings(out_channels: &[usize], in_channels: &[usize]) -> Vec<PairingTerm> {
    let (m, n) = (out_channels.len(), in_channels.len());
    let mut terms = vec![];
    let mut used = vec![false; m];
    let mut pairs = vec![];
    recurse(0, out_channels, in_channels, &mut used, &mut pairs, &mut terms);
    for t in &mut terms {
        t.coefficient = minus_i_pow(m + n - 2 * t.k);
    }
    terms
}

fn recurse(
    input: usize,
    out_channels: &[usize],
    in_channels: &[usize],
    used: &mut Vec<bool>,
    pairs: &mut Vec<(usize, usize)>,
    terms: &mut Vec<PairingTerm>,
) {
    if input == in_channels.len() {
        let paired_in: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        terms.push(PairingTerm {
            k: pairs.len(),
            pairs: pairs.clone(),
            unpaired_out: (0..out_channels.len()).filter(|&o| !used[o]).collect(),
            unpaired_in: (0..in_channels.len()).filter(|i| !paired_in.contains(i)).collect(),
            coefficient: C64::new(1.0, 0.0),
        });
        return;
    }
    // leave this input unpaired
    recurse(input + 1, out_channels, in_channels, used, pairs, terms);
    for o in 0..out_channels.len() {
        if !used[o] && out_channels[o] == in_channels[input] {
            used[o] = true;
            pairs.push((o, input));
            recurse(input + 1, out_channels, in_channels, used, pairs, terms);
            pairs.pop();
            used[o] = false;
        }
    }
}

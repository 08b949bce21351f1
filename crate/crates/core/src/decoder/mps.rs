//! Boundary-MPS contraction of the coset sums.
//!
//! Check spins live on the `(d+1) x (d+1)` grid of face positions; positions
//! without a check are pinned to `+1` by a mask. Every qubit is a plaquette of
//! that grid whose weight `W(tl, tr, bl, br)` is the probability of the parent
//! letter times the letters of the flipped corner checks. The boundary state is
//! an MPS over one row of grid spins, advanced one plaquette at a time:
//! the two-site tensor `(t_c, s_c)` absorbs `s_{c+1}`, sums `s_c` against the
//! plaquette, and splits off `t_c` by a truncated SVD. A right-to-left sweep
//! restores right-canonical form before the next row.
//!
//! Site tensors are stored `[left][phys][right]`, row-major.

use faer::Mat;

use crate::code::CodeSpec;
use crate::error::Result;
use crate::noise::NoiseParams;
use crate::pauli::{PauliLetter, PauliString};

use super::{class_chains, CosetProbabilities, DecoderConfig, SweepAxis};

#[derive(Clone, Debug)]
struct Site {
    l: usize,
    r: usize,
    data: Vec<f64>,
}

impl Site {
    #[inline]
    fn at(&self, a: usize, p: usize, b: usize) -> f64 {
        self.data[(a * 2 + p) * self.r + b]
    }
}

/// Plaquette layout in sweep orientation.
struct Geometry {
    d: usize,
    /// `present[R * (d+1) + C]`: a check sits at grid position `(R, C)`.
    present: Vec<bool>,
    /// Sweep-order qubit `(R, c)` maps to this code qubit.
    qubit: Vec<usize>,
    /// Corner letters `[TL, TR, BL, BR]` of each sweep-order qubit.
    corners: Vec<[PauliLetter; 4]>,
}

impl Geometry {
    fn new(code: &CodeSpec, axis: SweepAxis) -> Self {
        let d = code.d;
        let g = d + 1;
        let mut owner = vec![None; g * g];
        for (i, &(r, c)) in code.faces.iter().enumerate() {
            owner[(r + 1) as usize * g + (c + 1) as usize] = Some(i);
        }
        let letter = |gr: usize, gc: usize, v: usize| owner[gr * g + gc].map_or(PauliLetter::I, |i| code.checks[i].get(v));
        let mut present = vec![false; g * g];
        let mut qubit = Vec::with_capacity(d * d);
        let mut corners = Vec::with_capacity(d * d);
        for big_r in 0..g {
            for big_c in 0..g {
                let (ar, ac) = match axis {
                    SweepAxis::Rows => (big_r, big_c),
                    SweepAxis::Columns => (big_c, big_r),
                };
                present[big_r * g + big_c] = owner[ar * g + ac].is_some();
            }
        }
        for r in 0..d {
            for c in 0..d {
                let (row, col) = match axis {
                    SweepAxis::Rows => (r, c),
                    SweepAxis::Columns => (c, r),
                };
                let v = code.qubit(row, col);
                let tl = letter(row, col, v);
                let tr = letter(row, col + 1, v);
                let bl = letter(row + 1, col, v);
                let br = letter(row + 1, col + 1, v);
                qubit.push(v);
                corners.push(match axis {
                    SweepAxis::Rows => [tl, tr, bl, br],
                    SweepAxis::Columns => [tl, bl, tr, br],
                });
            }
        }
        Self {
            d,
            present,
            qubit,
            corners,
        }
    }

    #[inline]
    fn mask(&self, big_r: usize, big_c: usize, spin: usize) -> f64 {
        if spin == 0 || self.present[big_r * (self.d + 1) + big_c] {
            1.0
        } else {
            0.0
        }
    }

    /// `W[tl*8 + tr*4 + bl*2 + br]` for every sweep-order qubit.
    fn weights(&self, noise: &NoiseParams, chain: &PauliString) -> Vec<[f64; 16]> {
        self.qubit
            .iter()
            .zip(&self.corners)
            .map(|(&v, corners)| {
                let mut w = [0.0; 16];
                for (bits, slot) in w.iter_mut().enumerate() {
                    let mut letter = chain.get(v);
                    for (j, &corner) in corners.iter().enumerate() {
                        if bits >> (3 - j) & 1 == 1 {
                            letter = letter.mul(corner);
                        }
                    }
                    *slot = noise.letter_prob(letter);
                }
                w
            })
            .collect()
    }
}

/// Truncated SVD of a `rows x cols` row-major matrix: returns `(U, S V^T, k)`, with
/// `U` as `rows x k` and `S V^T` as `k x cols`.
fn split(rows: usize, cols: usize, data: &[f64], cfg: &DecoderConfig) -> (Vec<f64>, Vec<f64>, usize) {
    let m = Mat::from_fn(rows, cols, |a, b| data[a * cols + b]);
    let svd = m.thin_svd().expect("SVD of a finite matrix converges");
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    // faer sorts singular values in nonincreasing order.
    let s_max = s[0];
    let k = (0..s.nrows())
        .take(cfg.chi)
        .take_while(|&i| s[i] > cfg.svd_cutoff * s_max)
        .count()
        .max(1);
    let mut left = vec![0.0; rows * k];
    let mut right = vec![0.0; k * cols];
    for j in 0..k {
        for a in 0..rows {
            left[a * k + j] = u[(a, j)];
        }
        for b in 0..cols {
            right[j * cols + b] = s[j] * v[(b, j)];
        }
    }
    (left, right, k)
}

/// Untruncated split with an identity factor on the smaller side; no rounding.
fn split_exact(rows: usize, cols: usize, data: &[f64]) -> (Vec<f64>, Vec<f64>, usize) {
    let identity = |n: usize| (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect();
    if rows <= cols {
        (identity(rows), data.to_vec(), rows)
    } else {
        (data.to_vec(), identity(cols), cols)
    }
}

/// Scales `data` to unit Frobenius norm and returns the log of the old norm.
fn normalize(data: &mut [f64]) -> f64 {
    let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in data.iter_mut() {
            *x /= norm;
        }
        norm.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// A row MPS over `g` spins never needs a bond above `2^(g/2)`. With `chi` at
/// least that, nothing is truncated, so the SVDs and the canonical sweep are
/// skipped and no rounding enters beyond the products themselves.
fn log_coset(geo: &Geometry, w: &[[f64; 16]], cfg: &DecoderConfig) -> f64 {
    contract(geo, w, cfg, cfg.chi >= 1 << geo.d.div_ceil(2))
}

fn contract(geo: &Geometry, w: &[[f64; 16]], cfg: &DecoderConfig, exact: bool) -> f64 {
    let d = geo.d;
    let g = d + 1;
    let split = |rows: usize, cols: usize, data: &[f64]| {
        if exact {
            split_exact(rows, cols, data)
        } else {
            split(rows, cols, data, cfg)
        }
    };
    let mut log_scale = 0.0;
    let mut mps: Vec<Site> = (0..g)
        .map(|c| {
            let mut data = vec![1.0, geo.mask(0, c, 1)];
            log_scale += normalize(&mut data);
            Site { l: 1, r: 1, data }
        })
        .collect();

    for big_r in 0..d {
        let next_row = big_r + 1;
        let mut out: Vec<Site> = Vec::with_capacity(g);
        // pending[l][t][s][r] holds (t_c, s_c) with the orthogonality centre.
        let first = &mps[0];
        let (mut pl, mut pr) = (1, first.r);
        let mut pending = vec![0.0; 4 * pr];
        for t in 0..2 {
            let m = geo.mask(next_row, 0, t);
            for s in 0..2 {
                for b in 0..pr {
                    pending[(t * 2 + s) * pr + b] = m * first.at(0, s, b);
                }
            }
        }
        for c in 0..d {
            let site = &mps[c + 1];
            let r2 = site.r;
            let wq = &w[big_r * d + c];
            // q[l][t][s][s2][r2]
            let mut q = vec![0.0; pl * 8 * r2];
            for a in 0..pl {
                for t in 0..2 {
                    for s in 0..2 {
                        let row = &pending[((a * 2 + t) * 2 + s) * pr..][..pr];
                        for s2 in 0..2 {
                            let dst = &mut q[(((a * 2 + t) * 2 + s) * 2 + s2) * r2..][..r2];
                            for (b, &x) in row.iter().enumerate() {
                                if x == 0.0 {
                                    continue;
                                }
                                let src = &site.data[(b * 2 + s2) * r2..][..r2];
                                for (o, &y) in dst.iter_mut().zip(src) {
                                    *o += x * y;
                                }
                            }
                        }
                    }
                }
            }
            // n[l][t][t2][s2][r2] = sum_s q[l][t][s][s2][r2] W(s, s2, t, t2)
            let mut n = vec![0.0; pl * 8 * r2];
            for a in 0..pl {
                for t in 0..2 {
                    for t2 in 0..2 {
                        let m = geo.mask(next_row, c + 1, t2);
                        if m == 0.0 {
                            continue;
                        }
                        for s2 in 0..2 {
                            let dst_off = (((a * 2 + t) * 2 + t2) * 2 + s2) * r2;
                            for s in 0..2 {
                                let wv = wq[s * 8 + s2 * 4 + t * 2 + t2];
                                if wv == 0.0 {
                                    continue;
                                }
                                let src_off = (((a * 2 + t) * 2 + s) * 2 + s2) * r2;
                                for b in 0..r2 {
                                    n[dst_off + b] += wv * q[src_off + b];
                                }
                            }
                        }
                    }
                }
            }
            if c + 1 < d {
                let (u, rest, k) = split(pl * 2, 4 * r2, &n);
                out.push(Site { l: pl, r: k, data: u });
                pending = rest;
                log_scale += normalize(&mut pending);
                pl = k;
                pr = r2;
            } else {
                // r2 == 1: sum out the last old spin.
                let mut m2 = vec![0.0; pl * 4];
                for a in 0..pl {
                    for t in 0..2 {
                        for t2 in 0..2 {
                            let off = ((a * 2 + t) * 2 + t2) * 2;
                            m2[(a * 2 + t) * 2 + t2] = n[off] + n[off + 1];
                        }
                    }
                }
                let (u, mut rest, k) = split(pl * 2, 2, &m2);
                out.push(Site { l: pl, r: k, data: u });
                log_scale += normalize(&mut rest);
                out.push(Site { l: k, r: 1, data: rest });
            }
        }
        if !log_scale.is_finite() {
            return f64::NEG_INFINITY;
        }
        // Right-to-left sweep back to right-canonical form.
        for i in (1..g).rev().filter(|_| !exact) {
            let (l, r) = (out[i].l, out[i].r);
            let mut at = vec![0.0; 2 * r * l];
            for a in 0..l {
                for x in 0..2 * r {
                    at[x * l + a] = out[i].data[a * 2 * r + x];
                }
            }
            // A^T = U S V^T, so A = (S V^T)^T U^T; U^T becomes the new site.
            let (u, svt, k) = split(2 * r, l, &at);
            let mut site = vec![0.0; k * 2 * r];
            for j in 0..k {
                for x in 0..2 * r {
                    site[j * 2 * r + x] = u[x * k + j];
                }
            }
            out[i] = Site { l: k, r, data: site };
            // carry = (S V^T)^T, shape l x k.
            let prev = &out[i - 1];
            let (pl0, pr0) = (prev.l, prev.r);
            let mut merged = vec![0.0; pl0 * 2 * k];
            for a in 0..pl0 * 2 {
                for b in 0..pr0 {
                    let x = prev.data[a * pr0 + b];
                    if x == 0.0 {
                        continue;
                    }
                    for j in 0..k {
                        merged[a * k + j] += x * svt[j * l + b];
                    }
                }
            }
            log_scale += normalize(&mut merged);
            out[i - 1] = Site {
                l: pl0,
                r: k,
                data: merged,
            };
        }
        if !log_scale.is_finite() {
            return f64::NEG_INFINITY;
        }
        mps = out;
    }

    let mut v = vec![1.0];
    for site in &mps {
        let mut next = vec![0.0; site.r];
        for (a, &va) in v.iter().enumerate() {
            for (b, o) in next.iter_mut().enumerate() {
                *o += va * (site.at(a, 0, b) + site.at(a, 1, b));
            }
        }
        v = next;
    }
    if v[0] > 0.0 {
        log_scale + v[0].ln()
    } else {
        f64::NEG_INFINITY
    }
}

pub(super) fn coset_probabilities(
    code: &CodeSpec,
    noise: &NoiseParams,
    rep: &PauliString,
    cfg: &DecoderConfig,
) -> Result<CosetProbabilities> {
    let geo = Geometry::new(code, cfg.axis);
    let log_p = class_chains(code, rep).each_ref().map(|c| log_coset(&geo, &geo.weights(noise, c), cfg));
    CosetProbabilities::from_log_weights(log_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_code, CodeFamily, Syndrome};
    use crate::noise::{biased_rates, Bias};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Row-to-row transfer over all `2^(d+1)` spin rows, no compression.
    fn dense_log_coset(geo: &Geometry, w: &[[f64; 16]]) -> f64 {
        let d = geo.d;
        let g = d + 1;
        let bit = |x: usize, c: usize| x >> c & 1;
        let mut psi: Vec<f64> = (0..1usize << g)
            .map(|x| (0..g).map(|c| geo.mask(0, c, bit(x, c))).product())
            .collect();
        let mut log_scale = 0.0;
        for r in 0..d {
            let mut next = vec![0.0; 1 << g];
            for (t, o) in next.iter_mut().enumerate() {
                let m: f64 = (0..g).map(|c| geo.mask(r + 1, c, bit(t, c))).product();
                if m == 0.0 {
                    continue;
                }
                for (s, &ps) in psi.iter().enumerate() {
                    let mut prod = ps;
                    for c in 0..d {
                        prod *= w[r * d + c][bit(s, c) * 8 + bit(s, c + 1) * 4 + bit(t, c) * 2 + bit(t, c + 1)];
                    }
                    *o += prod;
                }
            }
            let scale = next.iter().cloned().fold(0.0, f64::max);
            next.iter_mut().for_each(|x| *x /= scale);
            log_scale += scale.ln();
            psi = next;
        }
        log_scale + psi.iter().sum::<f64>().ln()
    }

    #[test]
    fn exact_split_survives_tiny_rates() {
        // Rates spanning ~30 orders of magnitude defeat an SVD's relative resolution.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = build_code(CodeFamily::Xz, 5).unwrap();
        let noise = biased_rates(1e-6, Bias::Finite(100.0)).unwrap();
        let geo = Geometry::new(&code, SweepAxis::Rows);
        for _ in 0..3 {
            let s = Syndrome::new((0..code.num_checks()).map(|_| rng.random_bool(0.2)).collect());
            let rep = code.representative(&s).unwrap();
            for chain in class_chains(&code, &rep) {
                let w = geo.weights(&noise, &chain);
                let want = dense_log_coset(&geo, &w);
                let got = log_coset(&geo, &w, &DecoderConfig::with_chi(8));
                assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn staircase_matches_dense_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for family in [CodeFamily::Xzzx, CodeFamily::Xy, CodeFamily::Xz] {
            for d in [3, 5] {
                let code = build_code(family, d).unwrap();
                let noise = biased_rates(0.3, Bias::Finite(10.0)).unwrap();
                for axis in [SweepAxis::Rows, SweepAxis::Columns] {
                    let geo = Geometry::new(&code, axis);
                    for _ in 0..5 {
                        let s = Syndrome::new((0..code.num_checks()).map(|_| rng.random_bool(0.5)).collect());
                        let rep = code.representative(&s).unwrap();
                        for chain in class_chains(&code, &rep) {
                            let w = geo.weights(&noise, &chain);
                            let want = dense_log_coset(&geo, &w);
                            let cfg = DecoderConfig::with_chi(64);
                            for exact in [false, true] {
                                let got = contract(&geo, &w, &cfg, exact);
                                assert!((got - want).abs() < 1e-10, "{family} d={d} {axis:?} {exact}: {got} vs {want}");
                            }
                        }
                    }
                }
            }
        }
    }
}

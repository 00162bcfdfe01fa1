//! Contraction of one brickwork column into a translation-invariant MPS site.
//!
//! Column `j` holds the odd-layer gate on pair `j` and the even-layer gate that
//! straddles pairs `j` and `j+1`. Each transition between layers `t` and `t+1`
//! carries one symbol across the column boundary: for odd `t` the odd gate's
//! left output leaves through the left bond and the even gate's right input
//! enters through the right bond; for even `t` the even gate's right output
//! leaves through the right bond and the next odd gate's left input enters
//! through the left bond. Bond indices are `Σ_t s_t A^{t-1}` on both sides.

use nalgebra::DMatrix;

use crate::mps::SiteTensor;

pub(crate) struct ColumnKernel<'a> {
    /// Symbol alphabet size per qubit.
    pub alphabet: usize,
    /// `gate[(out_l + A·out_r)·A² + in_l + A·in_r]`.
    pub gate: &'a [f64],
    /// Final-layer weights summed over outputs: `terminal[in_l + A·in_r]`.
    pub terminal: &'a [f64],
    /// Layer-1 gate input for each physical index.
    pub inputs: &'a [(usize, usize)],
}

impl ColumnKernel<'_> {
    #[inline]
    fn g(&self, out_l: usize, out_r: usize, in_l: usize, in_r: usize) -> f64 {
        let a = self.alphabet;
        self.gate[(out_l + a * out_r) * a * a + in_l + a * in_r]
    }

    #[inline]
    fn f(&self, in_l: usize, in_r: usize) -> f64 {
        self.terminal[in_l + self.alphabet * in_r]
    }

    /// Site tensor for depth `d ≥ 1`; bond dimension `A^{d-1}`.
    pub fn build(&self, d: usize) -> SiteTensor {
        assert!(d >= 1);
        let a = self.alphabet;
        let phys = self.inputs.len();
        if d == 1 {
            return self.inputs.iter().map(|&(l, r)| DMatrix::from_element(1, 1, self.f(l, r))).collect();
        }
        // x[((v·nl + l)·nr + r)·A + c], with c the symbol carried inside the column.
        let (mut nl, mut nr) = (a, 1usize);
        let mut x = vec![0.0; phys * nl * nr * a];
        for (v, &(il, ir)) in self.inputs.iter().enumerate() {
            for l1 in 0..a {
                for c in 0..a {
                    x[(v * nl + l1) * a + c] = self.g(l1, c, il, ir);
                }
            }
        }
        for layer in 2..=d {
            let last = layer == d;
            if layer % 2 == 0 {
                // Even gate: inputs (c, ρ) with ρ entering on the right; outputs (c', σ), σ leaving right.
                let grow = if last { a } else { a * a };
                let nr2 = nr * grow;
                let width = if last { 1 } else { a };
                let mut y = vec![0.0; phys * nl * nr2 * width];
                for vl in 0..phys * nl {
                    for r in 0..nr {
                        let src = &x[(vl * nr + r) * a..(vl * nr + r + 1) * a];
                        for rho in 0..a {
                            if last {
                                let s: f64 = (0..a).map(|c| src[c] * self.f(c, rho)).sum();
                                y[vl * nr2 + r + nr * rho] = s;
                            } else {
                                for sigma in 0..a {
                                    let col = r + nr * rho + nr * a * sigma;
                                    for c2 in 0..a {
                                        let s: f64 = (0..a).map(|c| src[c] * self.g(c2, sigma, c, rho)).sum();
                                        y[(vl * nr2 + col) * a + c2] = s;
                                    }
                                }
                            }
                        }
                    }
                }
                nr = nr2;
                x = y;
            } else {
                // Odd gate: inputs (λ, c) with λ entering on the left; outputs (μ, c'), μ leaving left.
                let grow = if last { a } else { a * a };
                let nl2 = nl * grow;
                let width = if last { 1 } else { a };
                let mut y = vec![0.0; phys * nl2 * nr * width];
                for v in 0..phys {
                    for l in 0..nl {
                        for r in 0..nr {
                            let base = ((v * nl + l) * nr + r) * a;
                            let src = &x[base..base + a];
                            for lam in 0..a {
                                if last {
                                    let s: f64 = (0..a).map(|c| src[c] * self.f(lam, c)).sum();
                                    y[(v * nl2 + l + nl * lam) * nr + r] = s;
                                } else {
                                    for mu in 0..a {
                                        let row = l + nl * lam + nl * a * mu;
                                        for c2 in 0..a {
                                            let s: f64 = (0..a).map(|c| src[c] * self.g(mu, c2, lam, c)).sum();
                                            y[((v * nl2 + row) * nr + r) * a + c2] = s;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                nl = nl2;
                x = y;
            }
        }
        debug_assert_eq!(nl, a.pow(d as u32 - 1));
        debug_assert_eq!(nr, a.pow(d as u32 - 1));
        x.chunks(nl * nr).map(|c| DMatrix::from_row_slice(nl, nr, c)).collect()
    }
}

//! Clifford tableaux, the enumerated one- and two-qubit Clifford groups, and
//! uniform sampling of global Cliffords.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{mul_packed, PauliString, X, Z};

/// Elementary gates used to generate the small Clifford groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    H(u8),
    S(u8),
    /// CNOT with control on local qubit 0 and target on local qubit 1.
    Cx,
}

/// Pauli action of a one- or two-qubit Clifford as a lookup table over
/// packed labels (`label_a | label_b << 2`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalClifford {
    arity: u8,
    image: [u8; 16],
    negative: [bool; 16],
    word: Vec<Generator>,
}

impl LocalClifford {
    fn identity(arity: u8) -> Self {
        let mut image = [0u8; 16];
        for (l, slot) in image.iter_mut().enumerate().take(1 << (2 * arity)) {
            *slot = l as u8;
        }
        Self { arity, image, negative: [false; 16], word: Vec::new() }
    }

    /// Build the full table from the images of `X_q` and `Z_q` (packed labels with sign).
    /// `gens[2q]` is the image of `X_q`, `gens[2q+1]` of `Z_q`.
    pub fn from_generator_images(arity: u8, gens: &[(u8, bool)]) -> Result<Self> {
        let a = arity as usize;
        if gens.len() != 2 * a {
            return Err(Error::DimensionMismatch { expected: 2 * a, got: gens.len() });
        }
        let size = 1usize << (2 * a);
        let mut out = Self::identity(arity);
        for label in 0..size {
            // P = prod_q i^{x_q z_q} X_q^{x_q} Z_q^{z_q}
            let mut acc = 0u8;
            let mut phase = 0u8;
            for q in 0..a {
                let l = ((label >> (2 * q)) & 3) as u8;
                let (x, z) = (l & 1, l >> 1);
                phase += x & z;
                if x == 1 {
                    let (img, neg) = gens[2 * q];
                    let (p, k) = mul_packed(acc, img, a);
                    acc = p;
                    phase += k + 2 * neg as u8;
                }
                if z == 1 {
                    let (img, neg) = gens[2 * q + 1];
                    let (p, k) = mul_packed(acc, img, a);
                    acc = p;
                    phase += k + 2 * neg as u8;
                }
            }
            if phase % 2 == 1 {
                return Err(Error::Shape("generator images do not define a Clifford".into()));
            }
            out.image[label] = acc;
            out.negative[label] = phase & 3 == 2;
        }
        let mut seen = [false; 16];
        for l in 0..size {
            if seen[out.image[l] as usize] {
                return Err(Error::Shape("generator images are not independent".into()));
            }
            seen[out.image[l] as usize] = true;
        }
        Ok(out)
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    /// Image of a packed label: `(label', negative)`.
    #[inline]
    pub fn apply(&self, label: u8) -> (u8, bool) {
        (self.image[label as usize], self.negative[label as usize])
    }

    /// Generator word; the unitary is `G_last ··· G_first`.
    pub fn word(&self) -> &[Generator] {
        &self.word
    }

    /// `other` applied after `self`.
    fn then(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for l in 0..1usize << (2 * self.arity) {
            let (img, neg) = other.apply(self.image[l]);
            out.image[l] = img;
            out.negative[l] = self.negative[l] ^ neg;
        }
        out
    }

    fn key(&self) -> u64 {
        let mut key = 0u64;
        for q in 0..self.arity as usize {
            for l in [1u8 << (2 * q), 2u8 << (2 * q)] {
                key = key << 5 | (self.image[l as usize] as u64) << 1 | self.negative[l as usize] as u64;
            }
        }
        key
    }

    /// Table of a single generator acting on two qubits.
    pub fn generator(g: Generator) -> Self {
        let mut t = match g {
            Generator::H(q) => {
                let mut gens = vec![(X, false), (Z, false), (X << 2, false), (Z << 2, false)];
                gens.swap(2 * q as usize, 2 * q as usize + 1);
                Self::from_generator_images(2, &gens).unwrap()
            }
            Generator::S(q) => {
                let mut gens = vec![(X, false), (Z, false), (X << 2, false), (Z << 2, false)];
                gens[2 * q as usize].0 |= gens[2 * q as usize + 1].0;
                Self::from_generator_images(2, &gens).unwrap()
            }
            Generator::Cx => {
                let gens = [(X | X << 2, false), (Z, false), (X << 2, false), (Z | Z << 2, false)];
                Self::from_generator_images(2, &gens).unwrap()
            }
        };
        t.word = vec![g];
        t
    }

    fn restrict_to_one_qubit(&self) -> Self {
        let mut out = Self::identity(1);
        for l in 0..4 {
            let (img, neg) = self.apply(l);
            debug_assert!(img < 4);
            out.image[l as usize] = img;
            out.negative[l as usize] = neg;
        }
        out.word = self.word.clone();
        out
    }
}

/// All elements of the one- or two-qubit Clifford group modulo global phase.
pub struct CliffordGroup {
    elements: Vec<LocalClifford>,
}

impl CliffordGroup {
    fn enumerate(arity: u8) -> Self {
        let gens: Vec<LocalClifford> = match arity {
            1 => vec![Generator::H(0), Generator::S(0)],
            _ => vec![Generator::H(0), Generator::H(1), Generator::S(0), Generator::S(1), Generator::Cx],
        }
        .into_iter()
        .map(|g| {
            let t = LocalClifford::generator(g);
            if arity == 1 {
                t.restrict_to_one_qubit()
            } else {
                t
            }
        })
        .collect();
        let start = LocalClifford::identity(arity);
        let mut seen = HashMap::new();
        seen.insert(start.key(), 0usize);
        let mut elements = vec![start];
        let mut head = 0;
        while head < elements.len() {
            for g in &gens {
                let mut child = elements[head].then(g);
                let key = child.key();
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                    child.word = elements[head].word.clone();
                    child.word.extend_from_slice(&g.word);
                    e.insert(elements.len());
                    elements.push(child);
                }
            }
            head += 1;
        }
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> &LocalClifford {
        &self.elements[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &LocalClifford> {
        self.elements.iter()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.elements.len())
    }
}

/// The 24-element single-qubit Clifford group.
pub fn one_qubit_group() -> &'static CliffordGroup {
    static G: OnceLock<CliffordGroup> = OnceLock::new();
    G.get_or_init(|| CliffordGroup::enumerate(1))
}

/// The 11520-element two-qubit Clifford group.
pub fn two_qubit_group() -> &'static CliffordGroup {
    static G: OnceLock<CliffordGroup> = OnceLock::new();
    G.get_or_init(|| CliffordGroup::enumerate(2))
}

/// Conjugation action of an `n`-qubit Clifford, stored as the images of
/// `X_q` (entries `0..n`) and `Z_q` (entries `n..2n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let mut images = Vec::with_capacity(2 * n);
        for label in [X, Z] {
            for q in 0..n {
                images.push(PauliString::single(n, q, label));
            }
        }
        Self { images }
    }

    pub fn from_images(images: Vec<PauliString>) -> Result<Self> {
        if !images.len().is_multiple_of(2) {
            return Err(Error::Shape("tableau needs 2n images".into()));
        }
        let n = images.len() / 2;
        if let Some(p) = images.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.n() });
        }
        let t = Self { images };
        if !t.is_symplectic() {
            return Err(Error::Shape("images do not preserve the symplectic form".into()));
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.images.len() / 2
    }

    pub fn image_x(&self, q: usize) -> &PauliString {
        &self.images[q]
    }

    pub fn image_z(&self, q: usize) -> &PauliString {
        &self.images[self.n() + q]
    }

    /// Column `c` holds the `(x | z)` bits of the image of generator `c`.
    pub fn symplectic_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        let mut m = vec![vec![false; 2 * n]; 2 * n];
        for (c, img) in self.images.iter().enumerate() {
            for q in 0..n {
                m[q][c] = img.label(q) & 1 == 1;
                m[n + q][c] = img.label(q) & 2 == 2;
            }
        }
        m
    }

    pub fn phases(&self) -> Vec<bool> {
        self.images.iter().map(|p| p.is_negative()).collect()
    }

    /// Checks `S^T J S = J` over GF(2).
    pub fn is_symplectic(&self) -> bool {
        let n = self.n();
        for a in 0..2 * n {
            for b in 0..2 * n {
                let expected = a % n == b % n && a != b;
                if self.images[a].commutes_with(&self.images[b]) == expected {
                    return false;
                }
            }
        }
        true
    }

    /// `U P U†`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        let n = self.n();
        if p.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.n() });
        }
        let mut acc = PauliString::identity(n);
        let mut phase = 2 * p.is_negative() as u8;
        for q in 0..n {
            let l = p.label(q);
            if l & 1 == 1 {
                let (k, next) = acc.product(&self.images[q]);
                acc = next;
                phase += k;
            }
            if l & 2 == 2 {
                let (k, next) = acc.product(&self.images[n + q]);
                acc = next;
                phase += k;
            }
            phase += (l & 1) & (l >> 1);
        }
        debug_assert!(phase.is_multiple_of(2));
        acc.set_negative(phase & 3 == 2);
        Ok(acc)
    }

    /// Tableau of `next · self`, i.e. `self` applied first.
    pub fn then(&self, next: &Self) -> Result<Self> {
        let images = self.images.iter().map(|p| next.conjugate(p)).collect::<Result<_>>()?;
        Ok(Self { images })
    }

    /// Apply a local gate after this tableau.
    pub fn apply_local(&mut self, gate: &LocalClifford, qubits: &[usize]) {
        for img in &mut self.images {
            apply_local_in_place(gate, qubits, img);
        }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        // The images form a symplectic basis, so the preimage of a Pauli T has
        // X_q-coefficient <U Z_q U†, T> and Z_q-coefficient <U X_q U†, T>.
        let mut images = Vec::with_capacity(2 * n);
        for target in 0..2 * n {
            let mut x = vec![false; n];
            let mut z = vec![false; n];
            let target_pauli = if target < n {
                PauliString::single(n, target, X)
            } else {
                PauliString::single(n, target - n, Z)
            };
            for q in 0..n {
                x[q] = !self.images[n + q].commutes_with(&target_pauli);
                z[q] = !self.images[q].commutes_with(&target_pauli);
            }
            images.push(PauliString::from_xz(&x, &z, false).expect("equal lengths"));
        }
        let mut inv = Self { images };
        for c in 0..2 * n {
            let back = self.conjugate(&inv.images[c]).expect("same size");
            if back.is_negative() {
                let flipped = inv.images[c].negated();
                inv.images[c] = flipped;
            }
        }
        inv
    }
}

#[inline]
pub(crate) fn apply_local_in_place(gate: &LocalClifford, qubits: &[usize], p: &mut PauliString) {
    let labels = p.labels_mut();
    let neg = match *qubits {
        [a] => {
            let (img, neg) = gate.apply(labels[a]);
            labels[a] = img;
            neg
        }
        [a, b] => {
            let (img, neg) = gate.apply(labels[a] | labels[b] << 2);
            labels[a] = img & 3;
            labels[b] = img >> 2;
            neg
        }
        _ => unreachable!("local gates act on one or two qubits"),
    };
    if neg {
        let flipped = !p.is_negative();
        p.set_negative(flipped);
    }
}

fn symplectic_form(a: &[bool], b: &[bool], n: usize) -> bool {
    let mut s = false;
    for q in 0..n {
        s ^= (a[q] & b[n + q]) ^ (a[n + q] & b[q]);
    }
    s
}

fn random_combination<R: Rng + ?Sized>(basis: &[Vec<bool>], rng: &mut R) -> Vec<bool> {
    let len = basis[0].len();
    let mut v = vec![false; len];
    for b in basis {
        if rng.random::<bool>() {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi ^= bi;
            }
        }
    }
    v
}

fn row_basis(vectors: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for mut v in vectors {
        for (r, &p) in rows.iter().zip(&pivots) {
            if v[p] {
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi ^= ri;
                }
            }
        }
        if let Some(p) = v.iter().position(|&b| b) {
            for r in rows.iter_mut() {
                if r[p] {
                    for (ri, vi) in r.iter_mut().zip(&v) {
                        *ri ^= vi;
                    }
                }
            }
            rows.push(v);
            pivots.push(p);
        }
    }
    rows
}

/// Uniformly random `n`-qubit Clifford (modulo global phase) by symplectic
/// Gram-Schmidt with random signs.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordTableau {
    let dim = 2 * n;
    let mut basis: Vec<Vec<bool>> = (0..dim)
        .map(|i| {
            let mut e = vec![false; dim];
            e[i] = true;
            e
        })
        .collect();
    let mut xs = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    for _ in 0..n {
        let v = loop {
            let v = random_combination(&basis, rng);
            if v.iter().any(|&b| b) {
                break v;
            }
        };
        let w = loop {
            let w = random_combination(&basis, rng);
            if symplectic_form(&v, &w, n) {
                break w;
            }
        };
        let projected = basis
            .iter()
            .map(|u| {
                let uw = symplectic_form(u, &w, n);
                let uv = symplectic_form(u, &v, n);
                (0..dim).map(|i| u[i] ^ (uw & v[i]) ^ (uv & w[i])).collect()
            })
            .collect();
        basis = row_basis(projected);
        xs.push(v);
        zs.push(w);
    }
    let to_pauli = |v: &Vec<bool>, rng: &mut R| {
        PauliString::from_xz(&v[..n], &v[n..], rng.random::<bool>()).expect("equal halves")
    };
    let mut images = Vec::with_capacity(dim);
    for v in &xs {
        images.push(to_pauli(v, rng));
    }
    for w in &zs {
        images.push(to_pauli(w, rng));
    }
    CliffordTableau { images }
}

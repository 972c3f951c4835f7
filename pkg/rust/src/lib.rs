//! Minimal pairing backend: BLS12-381 group operations, compressed point
//! encodings, hash-to-curve, and multi-pairing. No protocol logic lives here.

use ark_bls12_381::{g1, g2, Bls12_381, Fq, Fq12, Fq2, Fr, G1Affine, G1Projective, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::Pairing;
use ark_ec::short_weierstrass::SWCurveConfig;
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{batch_inversion, BigInteger, Field, One, PrimeField, Zero};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use sha2::Sha256;

const FQ_BYTES: usize = 48;
const G1_BYTES: usize = 48;
const G2_BYTES: usize = 96;
const GT_BYTES: usize = 576;
const SCALAR_BYTES: usize = 32;

const FLAG_COMPRESSED: u8 = 0x80;
const FLAG_INFINITY: u8 = 0x40;
const FLAG_SIGN: u8 = 0x20;

fn err(msg: &str) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn fq_to_bytes(x: &Fq, out: &mut [u8]) {
    let v = x.into_bigint().to_bytes_be();
    debug_assert_eq!(v.len(), FQ_BYTES);
    out.copy_from_slice(&v);
}

// Canonical (< p) parse: reject anything that does not round-trip.
fn fq_from_bytes(data: &[u8]) -> PyResult<Fq> {
    let x = Fq::from_be_bytes_mod_order(data);
    if x.into_bigint().to_bytes_be() != data {
        return Err(err("invalid-encoding: field element not canonical"));
    }
    Ok(x)
}

fn scalar_from_bytes(data: &[u8]) -> PyResult<Fr> {
    if data.len() != SCALAR_BYTES {
        return Err(err("invalid-encoding: scalar must be 32 bytes"));
    }
    Ok(Fr::from_be_bytes_mod_order(data))
}

// Lexicographic "y is the larger root" test, per the common compressed format.
fn fq_is_larger(y: &Fq) -> bool {
    let neg = -*y;
    y.into_bigint() > neg.into_bigint()
}

fn fq2_is_larger(y: &Fq2) -> bool {
    let neg = -*y;
    if y.c1 != neg.c1 {
        return y.c1.into_bigint() > neg.c1.into_bigint();
    }
    y.c0.into_bigint() > neg.c0.into_bigint()
}

#[pyclass(frozen, eq, skip_from_py_object, module = "rfab._backend")]
#[derive(Clone, Copy, PartialEq)]
struct G1 {
    p: G1Projective,
}

#[pyclass(frozen, eq, skip_from_py_object, module = "rfab._backend")]
#[derive(Clone, Copy, PartialEq)]
struct G2 {
    p: G2Projective,
}

#[pyclass(frozen, eq, skip_from_py_object, module = "rfab._backend")]
#[derive(Clone, Copy, PartialEq)]
struct Gt {
    f: Fq12,
}

#[pymethods]
impl G1 {
    #[staticmethod]
    fn generator() -> Self {
        G1 { p: G1Projective::generator() }
    }

    #[staticmethod]
    fn identity() -> Self {
        G1 { p: G1Projective::zero() }
    }

    fn is_identity(&self) -> bool {
        self.p.is_zero()
    }

    fn mul(&self, other: &Self) -> Self {
        G1 { p: self.p + other.p }
    }

    fn inv(&self) -> Self {
        G1 { p: -self.p }
    }

    fn pow(&self, scalar: &[u8]) -> PyResult<Self> {
        let k = scalar_from_bytes(scalar)?;
        Ok(G1 { p: self.p * k })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let mut out = [0u8; G1_BYTES];
        if self.p.is_zero() {
            out[0] = FLAG_COMPRESSED | FLAG_INFINITY;
            return PyBytes::new(py, &out);
        }
        let a = self.p.into_affine();
        fq_to_bytes(&a.x, &mut out);
        out[0] |= FLAG_COMPRESSED;
        if fq_is_larger(&a.y) {
            out[0] |= FLAG_SIGN;
        }
        PyBytes::new(py, &out)
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        if data.len() != G1_BYTES {
            return Err(err("invalid-encoding: G1 must be 48 bytes"));
        }
        let flags = data[0] & 0xe0;
        if flags & FLAG_COMPRESSED == 0 {
            return Err(err("invalid-encoding: G1 missing compression flag"));
        }
        if flags & FLAG_INFINITY != 0 {
            if flags & FLAG_SIGN != 0
                || data[0] & 0x1f != 0
                || data[1..].iter().any(|&b| b != 0)
            {
                return Err(err("invalid-encoding: non-canonical G1 infinity"));
            }
            return Ok(G1 { p: G1Projective::zero() });
        }
        let mut xb = [0u8; FQ_BYTES];
        xb.copy_from_slice(data);
        xb[0] &= 0x1f;
        let x = fq_from_bytes(&xb)?;
        let y2 = x * x * x + g1::Config::COEFF_B;
        let y = y2.sqrt().ok_or_else(|| err("not-on-curve: G1 x has no square root"))?;
        let want_larger = flags & FLAG_SIGN != 0;
        let y = if fq_is_larger(&y) == want_larger { y } else { -y };
        let a = G1Affine::new_unchecked(x, y);
        if !a.is_in_correct_subgroup_assuming_on_curve() {
            return Err(err("not-in-subgroup: G1 point"));
        }
        Ok(G1 { p: a.into() })
    }
}

#[pymethods]
impl G2 {
    #[staticmethod]
    fn generator() -> Self {
        G2 { p: G2Projective::generator() }
    }

    #[staticmethod]
    fn identity() -> Self {
        G2 { p: G2Projective::zero() }
    }

    fn is_identity(&self) -> bool {
        self.p.is_zero()
    }

    fn mul(&self, other: &Self) -> Self {
        G2 { p: self.p + other.p }
    }

    fn inv(&self) -> Self {
        G2 { p: -self.p }
    }

    fn pow(&self, scalar: &[u8]) -> PyResult<Self> {
        let k = scalar_from_bytes(scalar)?;
        Ok(G2 { p: self.p * k })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let mut out = [0u8; G2_BYTES];
        if self.p.is_zero() {
            out[0] = FLAG_COMPRESSED | FLAG_INFINITY;
            return PyBytes::new(py, &out);
        }
        let a = self.p.into_affine();
        fq_to_bytes(&a.x.c1, &mut out[..FQ_BYTES]);
        fq_to_bytes(&a.x.c0, &mut out[FQ_BYTES..]);
        out[0] |= FLAG_COMPRESSED;
        if fq2_is_larger(&a.y) {
            out[0] |= FLAG_SIGN;
        }
        PyBytes::new(py, &out)
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        if data.len() != G2_BYTES {
            return Err(err("invalid-encoding: G2 must be 96 bytes"));
        }
        let flags = data[0] & 0xe0;
        if flags & FLAG_COMPRESSED == 0 {
            return Err(err("invalid-encoding: G2 missing compression flag"));
        }
        if flags & FLAG_INFINITY != 0 {
            if flags & FLAG_SIGN != 0
                || data[0] & 0x1f != 0
                || data[1..].iter().any(|&b| b != 0)
            {
                return Err(err("invalid-encoding: non-canonical G2 infinity"));
            }
            return Ok(G2 { p: G2Projective::zero() });
        }
        let mut c1b = [0u8; FQ_BYTES];
        c1b.copy_from_slice(&data[..FQ_BYTES]);
        c1b[0] &= 0x1f;
        let c1 = fq_from_bytes(&c1b)?;
        let c0 = fq_from_bytes(&data[FQ_BYTES..])?;
        let x = Fq2::new(c0, c1);
        let y2 = x * x * x + g2::Config::COEFF_B;
        let y = y2.sqrt().ok_or_else(|| err("not-on-curve: G2 x has no square root"))?;
        let want_larger = flags & FLAG_SIGN != 0;
        let y = if fq2_is_larger(&y) == want_larger { y } else { -y };
        let a = ark_bls12_381::G2Affine::new_unchecked(x, y);
        if !a.is_in_correct_subgroup_assuming_on_curve() {
            return Err(err("not-in-subgroup: G2 point"));
        }
        Ok(G2 { p: a.into() })
    }
}

#[pymethods]
impl Gt {
    #[staticmethod]
    fn identity() -> Self {
        Gt { f: Fq12::one() }
    }

    fn is_identity(&self) -> bool {
        self.f.is_one()
    }

    fn mul(&self, other: &Self) -> Self {
        Gt { f: self.f * other.f }
    }

    fn inv(&self) -> PyResult<Self> {
        let inv = self.f.inverse().ok_or_else(|| err("invalid-encoding: Gt zero has no inverse"))?;
        Ok(Gt { f: inv })
    }

    fn pow(&self, scalar: &[u8]) -> PyResult<Self> {
        let k = scalar_from_bytes(scalar)?;
        Ok(Gt { f: self.f.pow(k.into_bigint()) })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let mut out = [0u8; GT_BYTES];
        let limbs = [
            self.f.c0.c0.c0, self.f.c0.c0.c1,
            self.f.c0.c1.c0, self.f.c0.c1.c1,
            self.f.c0.c2.c0, self.f.c0.c2.c1,
            self.f.c1.c0.c0, self.f.c1.c0.c1,
            self.f.c1.c1.c0, self.f.c1.c1.c1,
            self.f.c1.c2.c0, self.f.c1.c2.c1,
        ];
        for (i, limb) in limbs.iter().enumerate() {
            fq_to_bytes(limb, &mut out[i * FQ_BYTES..(i + 1) * FQ_BYTES]);
        }
        PyBytes::new(py, &out)
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        if data.len() != GT_BYTES {
            return Err(err("invalid-encoding: Gt must be 576 bytes"));
        }
        let mut limbs = [Fq::zero(); 12];
        for (i, limb) in limbs.iter_mut().enumerate() {
            *limb = fq_from_bytes(&data[i * FQ_BYTES..(i + 1) * FQ_BYTES])?;
        }
        let f = Fq12::new(
            ark_bls12_381::Fq6::new(
                Fq2::new(limbs[0], limbs[1]),
                Fq2::new(limbs[2], limbs[3]),
                Fq2::new(limbs[4], limbs[5]),
            ),
            ark_bls12_381::Fq6::new(
                Fq2::new(limbs[6], limbs[7]),
                Fq2::new(limbs[8], limbs[9]),
                Fq2::new(limbs[10], limbs[11]),
            ),
        );
        if !f.pow(Fr::MODULUS).is_one() {
            return Err(err("not-in-subgroup: Gt element"));
        }
        Ok(Gt { f })
    }
}

#[pyfunction]
fn pair(a: &G1, b: &G2) -> Gt {
    Gt { f: Bls12_381::pairing(a.p, b.p).0 }
}

#[pyfunction]
fn multi_pair(pairs: Vec<(Py<G1>, Py<G2>)>) -> PyResult<Gt> {
    if pairs.is_empty() {
        return Err(err("invalid-encoding: multi_pair needs at least one pair"));
    }
    let mut g1s = Vec::with_capacity(pairs.len());
    let mut g2s = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        g1s.push(a.get().p);
        g2s.push(b.get().p);
    }
    Ok(Gt { f: Bls12_381::multi_pairing(g1s, g2s).0 })
}

#[pyfunction]
fn g1_weighted_product(points: Vec<Py<G1>>, scalars: &[u8]) -> PyResult<G1> {
    if points.is_empty() {
        return Err(err("invalid-encoding: weighted product needs at least one term"));
    }
    if scalars.len() != points.len() * SCALAR_BYTES {
        return Err(err("invalid-encoding: scalar buffer length mismatch"));
    }
    // span-program coefficients are mostly 0/1; spot them by byte pattern
    // before paying for a field conversion
    let trivial = |chunk: &[u8]| -> Option<bool> {
        if chunk[..SCALAR_BYTES - 1].iter().any(|&b| b != 0) {
            return None;
        }
        match chunk[SCALAR_BYTES - 1] {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        }
    };
    if scalars.chunks_exact(SCALAR_BYTES).all(|c| trivial(c).is_some()) {
        let kept: Vec<G1Projective> = points
            .iter()
            .zip(scalars.chunks_exact(SCALAR_BYTES))
            .filter(|(_, c)| trivial(c) == Some(true))
            .map(|(p, _)| p.get().p)
            .collect();
        return Ok(G1 { p: sum_batch_affine(kept) });
    }
    // one shared inversion to normalize the bases buys mixed additions below
    let bases =
        G1Projective::normalize_batch(&points.iter().map(|p| p.get().p).collect::<Vec<_>>());
    let mut acc = G1Projective::zero();
    for (base, chunk) in bases.iter().zip(scalars.chunks_exact(SCALAR_BYTES)) {
        match trivial(chunk) {
            Some(false) => continue,
            Some(true) => acc += base,
            None => {
                let k = scalar_from_bytes(chunk)?;
                acc += *base * k;
            }
        }
    }
    Ok(G1 { p: acc })
}

/// Sum many points via layered batch-affine additions: each layer halves the
/// count and shares one field inversion across all of its additions, so the
/// amortized cost per add is far below a full projective addition.
fn sum_batch_affine(points: Vec<G1Projective>) -> G1Projective {
    if points.len() < 16 {
        let mut acc = G1Projective::zero();
        for p in points {
            acc += p;
        }
        return acc;
    }
    let mut layer = G1Projective::normalize_batch(&points);
    while layer.len() > 2 {
        let mut next = Vec::with_capacity(layer.len() / 2 + 1);
        let mut pending: Vec<(G1Affine, G1Affine)> = Vec::with_capacity(layer.len() / 2);
        let mut carry: Option<G1Affine> = None;
        for pair in layer.chunks(2) {
            match pair {
                [a, b] => {
                    if a.is_zero() {
                        next.push(*b);
                    } else if b.is_zero() {
                        next.push(*a);
                    } else if a.x == b.x {
                        // doubling and cancellation use the generic path
                        next.push((G1Projective::from(*a) + b).into_affine());
                    } else {
                        pending.push((*a, *b));
                    }
                }
                [a] => carry = Some(*a),
                _ => unreachable!(),
            }
        }
        // one inversion for every pending addition in this layer
        let mut denoms: Vec<_> = pending.iter().map(|(a, b)| b.x - a.x).collect();
        batch_inversion(&mut denoms);
        for ((a, b), inv) in pending.iter().zip(&denoms) {
            let lambda = (b.y - a.y) * inv;
            let x = lambda.square() - a.x - b.x;
            let y = lambda * (a.x - x) - a.y;
            next.push(G1Affine::new_unchecked(x, y));
        }
        if let Some(a) = carry {
            next.push(a);
        }
        layer = next;
    }
    let mut acc = G1Projective::zero();
    for p in layer {
        acc += p;
    }
    acc
}

// Reduced row echelon solve of sum_k x_k * A[k] = (1,0,...,0) over the scalar
// field. unknowns[k] holds the sparse (equation index, value) entries of
// column k of the transposed system. Pivot choice is the lowest-position
// remaining row holding the column; free variables are zero; an inconsistent
// system yields None. Fully deterministic.
#[pyfunction]
fn msp_solve(py: Python<'_>, n_eq: usize, payload: &[u8]) -> PyResult<Option<Py<PyBytes>>> {
    if n_eq == 0 {
        return Err(err("invalid-encoding: empty linear system"));
    }
    fn rd_u32(data: &[u8], off: usize) -> PyResult<usize> {
        data.get(off..off + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
            .ok_or_else(|| err("invalid-encoding: truncated solver payload"))
    }
    // payload: per unknown, a u32 entry count then count * (u32 equation
    // index, 32-byte scalar), big-endian throughout. Equations become
    // (column, value) vectors sorted by column; unknowns arrive in order,
    // so pushes are already sorted.
    let mut rows: Vec<Vec<(usize, Fr)>> = vec![Vec::new(); n_eq];
    let mut n_un = 0usize;
    let mut off = 0usize;
    while off < payload.len() {
        let count = rd_u32(payload, off)?;
        off += 4;
        for _ in 0..count {
            let j = rd_u32(payload, off)?;
            off += 4;
            let chunk = payload
                .get(off..off + SCALAR_BYTES)
                .ok_or_else(|| err("invalid-encoding: truncated solver payload"))?;
            off += SCALAR_BYTES;
            if j >= n_eq {
                return Err(err("invalid-encoding: equation index out of range"));
            }
            let v = scalar_from_bytes(chunk)?;
            if !v.is_zero() {
                rows[j].push((n_un, v));
            }
        }
        n_un += 1;
    }
    if n_un == 0 {
        return Err(err("invalid-encoding: empty linear system"));
    }
    let rhs = n_un;
    rows[0].push((rhs, Fr::one()));
    let mut order: Vec<usize> = (0..n_eq).collect();
    let mut position: Vec<usize> = (0..n_eq).collect();
    // handles that held the column at some point; may be stale or repeated,
    // so readers re-verify against the row and dedup
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n_un + 1];
    for (h, row) in rows.iter().enumerate() {
        for &(c, _) in row.iter() {
            col_rows[c].push(h);
        }
    }
    let has_col = |row: &[(usize, Fr)], c: usize| row.binary_search_by_key(&c, |e| e.0).is_ok();
    let neg_one = -Fr::one();
    let mut pivot_handle: Vec<Option<usize>> = vec![None; n_un];
    let mut rank = 0usize;
    let mut merged: Vec<(usize, Fr)> = Vec::new();
    for col in 0..n_un {
        let mut sel: Option<(usize, usize)> = None;
        for &h in col_rows[col].iter() {
            let pos = position[h];
            if pos < rank || sel.map_or(false, |(best, _)| pos >= best) {
                continue;
            }
            if has_col(&rows[h], col) {
                sel = Some((pos, h));
            }
        }
        let Some((_, sel)) = sel else { continue };
        let displaced = order[rank];
        let sel_pos = position[sel];
        order[rank] = sel;
        order[sel_pos] = displaced;
        position[sel] = rank;
        position[displaced] = sel_pos;
        let at = rows[sel].binary_search_by_key(&col, |e| e.0).expect("pivot entry");
        let pv = rows[sel][at].1;
        if !pv.is_one() {
            // -1 is self-inverse and by far the most common non-unit pivot
            // in gate-compiled matrices; dodge the expensive field inversion
            let inv = if pv == neg_one {
                neg_one
            } else {
                pv.inverse().expect("nonzero pivot")
            };
            for e in rows[sel].iter_mut() {
                e.1 *= inv;
            }
        }
        let mut targets: Vec<usize> = col_rows[col]
            .iter()
            .copied()
            .filter(|&h| h != sel && has_col(&rows[h], col))
            .collect();
        targets.sort_unstable();
        targets.dedup();
        let pivot = std::mem::take(&mut rows[sel]);
        for h in targets {
            let row = &rows[h];
            let f = row[row.binary_search_by_key(&col, |e| e.0).expect("target entry")].1;
            merged.clear();
            let (mut a, mut b) = (0usize, 0usize);
            while a < row.len() || b < pivot.len() {
                if b == pivot.len() || (a < row.len() && row[a].0 < pivot[b].0) {
                    merged.push(row[a]);
                    a += 1;
                } else if a == row.len() || pivot[b].0 < row[a].0 {
                    // new fill-in: f and the pivot entry are both nonzero
                    merged.push((pivot[b].0, -(f * pivot[b].1)));
                    col_rows[pivot[b].0].push(h);
                    b += 1;
                } else {
                    let nv = row[a].1 - f * pivot[b].1;
                    if !nv.is_zero() {
                        merged.push((row[a].0, nv));
                    }
                    a += 1;
                    b += 1;
                }
            }
            rows[h].clear();
            rows[h].extend_from_slice(&merged);
        }
        rows[sel] = pivot;
        pivot_handle[col] = Some(sel);
        rank += 1;
    }
    for r in rank..n_eq {
        if rows[order[r]].last().map_or(false, |e| e.0 == rhs) {
            return Ok(None);
        }
    }
    let mut out = vec![0u8; n_un * SCALAR_BYTES];
    for col in 0..n_un {
        let v = pivot_handle[col]
            .map(|h| match rows[h].last() {
                Some(&(c, v)) if c == rhs => v,
                _ => Fr::zero(),
            })
            .unwrap_or_else(Fr::zero);
        out[col * SCALAR_BYTES..(col + 1) * SCALAR_BYTES]
            .copy_from_slice(&v.into_bigint().to_bytes_be());
    }
    Ok(Some(PyBytes::new(py, &out).unbind()))
}

#[pyfunction]
fn hash_to_g1(dst: &[u8], msg: &[u8]) -> PyResult<G1> {
    let hasher = MapToCurveBasedHasher::<
        G1Projective,
        DefaultFieldHasher<Sha256, 128>,
        WBMap<g1::Config>,
    >::new(dst)
    .map_err(|e| err(&format!("invalid-encoding: hash-to-curve setup: {e}")))?;
    let a: G1Affine = hasher
        .hash(msg)
        .map_err(|e| err(&format!("invalid-encoding: hash-to-curve: {e}")))?;
    Ok(G1 { p: a.into() })
}

#[pyfunction]
fn group_order<'py>(py: Python<'py>) -> Bound<'py, PyBytes> {
    PyBytes::new(py, &Fr::MODULUS.to_bytes_be())
}

#[pyfunction]
fn curve_id() -> &'static str {
    "bls12-381"
}

#[pymodule]
fn _backend(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<G1>()?;
    m.add_class::<G2>()?;
    m.add_class::<Gt>()?;
    m.add_function(wrap_pyfunction!(pair, m)?)?;
    m.add_function(wrap_pyfunction!(multi_pair, m)?)?;
    m.add_function(wrap_pyfunction!(g1_weighted_product, m)?)?;
    m.add_function(wrap_pyfunction!(msp_solve, m)?)?;
    m.add_function(wrap_pyfunction!(hash_to_g1, m)?)?;
    m.add_function(wrap_pyfunction!(group_order, m)?)?;
    m.add_function(wrap_pyfunction!(curve_id, m)?)?;
    Ok(())
}

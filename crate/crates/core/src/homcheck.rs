//! Bar, cobar, and Koszul complexes with bigraded homology; Koszulity
//! verdicts by several criteria; lattice distributivity.

use crate::bigring::{BigGradedRing, Bimodule, ChainTensor, tensor_chain};
use crate::exactla::{BoundedComplex, FinModule, MatZm, ModuleMap};
use crate::quadra::{
    self, is_quadratic_up_to, quadratic_dual_coring, relations_of, DualCoring, GradedCoring,
};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// The Koszulity criteria implemented by this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    CobarDiagonal,
    BarDiagonal,
    KoszulComplex,
    Lattice,
    Matrix,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::CobarDiagonal => "cobar",
            Method::BarDiagonal => "bar",
            Method::KoszulComplex => "koszul-complex",
            Method::Lattice => "lattice",
            Method::Matrix => "matrix",
        }
    }
}

/// What a failed verdict points at.
#[derive(Clone, Debug)]
pub enum FailureWitness {
    /// a nonzero homology class: component (s, t) and a cycle in the
    /// term's coordinates, reproducible through the stored complex
    HomologyClass {
        component: (usize, usize),
        cycle: Vec<u64>,
    },
    /// a violating sublattice triple (bases of X, Y, Z)
    LatticeTriple {
        component: (usize, usize),
        x: Vec<Vec<u64>>,
        y: Vec<Vec<u64>>,
        z: Vec<Vec<u64>>,
    },
    /// the ring is not quadratic at the given degree
    NotQuadratic { degree: usize },
    /// a chain problem with certified witness absence (matrix method)
    MatrixProblem { description: String },
}

#[derive(Clone, Debug)]
pub enum VerdictResult {
    KoszulUpTo(usize),
    FailedAt {
        n: i32,
        i: i32,
        witness: FailureWitness,
    },
    /// search budget exhausted before a verdict (matrix method only)
    Inconclusive { coverage: String },
}

#[derive(Clone, Debug)]
pub struct KoszulVerdict {
    pub method: Method,
    pub checked_up_to: usize,
    pub result: VerdictResult,
}

impl KoszulVerdict {
    pub fn is_koszul(&self) -> bool {
        matches!(self.result, VerdictResult::KoszulUpTo(_))
    }

    pub fn summary(&self) -> String {
        match &self.result {
            VerdictResult::KoszulUpTo(d) => format!("koszul-up-to-{d}"),
            VerdictResult::FailedAt { n, i, .. } => format!("failed-at({n},{i})"),
            VerdictResult::Inconclusive { coverage } => format!("inconclusive ({coverage})"),
        }
    }
}

/// Bigraded homology entries over a finite window. Entries outside the
/// window are untested, never reported as zero.
#[derive(Clone, Debug)]
pub struct BigradedHomologyTable {
    pub modulus: u64,
    /// (cohomological degree n, internal degree i, s, t) -> homology
    pub entries: BTreeMap<(i32, i32, usize, usize), FinModule>,
    /// witnesses for nonzero entries, in term coordinates
    pub witnesses: BTreeMap<(i32, i32, usize, usize), Vec<u64>>,
    pub n_range: (i32, i32),
    pub i_range: (i32, i32),
}

impl BigradedHomologyTable {
    pub fn in_window(&self, n: i32, i: i32) -> bool {
        n >= self.n_range.0 && n <= self.n_range.1 && i >= self.i_range.0 && i <= self.i_range.1
    }

    /// Total rank of the homology at (n, i) across components.
    pub fn rank_at(&self, n: i32, i: i32) -> usize {
        self.entries
            .iter()
            .filter(|(&(en, ei, _, _), _)| en == n && ei == i)
            .map(|(_, m)| m.rank())
            .sum()
    }

    pub fn entry(&self, n: i32, i: i32, s: usize, t: usize) -> Option<&FinModule> {
        self.entries.get(&(n, i, s, t))
    }
}

/// A family of bounded complexes: one per (internal degree, s, t).
#[derive(Clone, Debug)]
pub struct ComplexFamily {
    pub modulus: u64,
    pub complexes: BTreeMap<(i32, usize, usize), BoundedComplex>,
}

impl ComplexFamily {
    /// d  d = 0 for every member.
    pub fn is_valid(&self) -> bool {
        self.complexes.values().all(|c| c.is_valid())
    }

    pub fn homology_table(&self, n_range: (i32, i32), i_range: (i32, i32)) -> BigradedHomologyTable {
        let mut entries = BTreeMap::new();
        let mut witnesses = BTreeMap::new();
        for (&(w, s, t), complex) in &self.complexes {
            for (&pos, _) in &complex.terms {
                let (h, wit) = complex.homology_with_witness(pos);
                if !h.is_zero() {
                    entries.insert((pos, w, s, t), h);
                    if let Some(c) = wit {
                        witnesses.insert((pos, w, s, t), c);
                    }
                }
            }
        }
        BigradedHomologyTable {
            modulus: self.modulus,
            entries,
            witnesses,
            n_range,
            i_range,
        }
    }
}

fn direct_sum_many(m: u64, mods: &[FinModule]) -> (FinModule, Vec<ModuleMap>, Vec<ModuleMap>) {
    let total: usize = mods.iter().map(|x| x.rank()).sum();
    let mut rels = MatZm::zeros(total, total, m);
    {
        let mut ofs = 0;
        for md in mods {
            for (i, &d) in md.factors().iter().enumerate() {
                rels[(ofs + i, ofs + i)] = d % m;
            }
            ofs += md.rank();
        }
    }
    let sq = crate::exactla::Subquotient::from_presentation(total, m, &rels);
    let sum = sq.module.clone();
    let mut embeds = Vec::new();
    let mut projs = Vec::new();
    let mut ofs = 0;
    for md in mods {
        let mut inc = MatZm::zeros(total, md.rank(), m);
        for i in 0..md.rank() {
            inc[(ofs + i, i)] = 1;
        }
        embeds.push(ModuleMap::new(
            md.clone(),
            sum.clone(),
            sq.to_canon.mul(&inc),
        ));
        let mut proj = MatZm::zeros(md.rank(), sum.rank(), m);
        for i in 0..md.rank() {
            for j in 0..sum.rank() {
                proj[(i, j)] = sq.reps[(ofs + i, j)];
            }
        }
        projs.push(ModuleMap::new(sum.clone(), md.clone(), proj));
        ofs += md.rank();
    }
    (sum, embeds, projs)
}

/// Compositions of w into n parts, each >= 1.
fn compositions(w: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if w == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=w.saturating_sub(n - 1) {
        for mut rest in compositions(w - first, n - 1) {
            let mut c = vec![first];
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

/// One graded term of a tensor complex: direct sum over compositions.
struct SumTerm {
    pieces: Vec<(Vec<usize>, ChainTensor)>,
    /// per (s, t): (sum module, embeddings, projections), parallel to pieces
    sums: Vec<(FinModule, Vec<ModuleMap>, Vec<ModuleMap>)>,
}

impl SumTerm {
    fn build(m: u64, no: usize, pieces: Vec<(Vec<usize>, ChainTensor)>) -> Self {
        let mut sums = Vec::with_capacity(no * no);
        for s in 0..no {
            for t in 0..no {
                let mods: Vec<FinModule> = pieces
                    .iter()
                    .map(|(_, ct)| ct.module(s, t).clone())
                    .collect();
                sums.push(direct_sum_many(m, &mods));
            }
        }
        Self { pieces, sums }
    }

    fn module(&self, no: usize, s: usize, t: usize) -> &FinModule {
        &self.sums[s * no + t].0
    }
}

/// The reduced cobar complex family of a coring: cohomological degree =
/// number of tensor factors, internal degree -w from the grading of C.
/// Indexed here by the weight w = |i|; position n in each complex is the
/// cohomological degree.
pub fn cobar_family(c: &GradedCoring, d: usize) -> Result<ComplexFamily> {
    let no = c.base.objects.len();
    let m = c.base.modulus;
    let mut complexes = BTreeMap::new();
    // weight 0: the base in cohomological degree 0 with zero differential
    for s in 0..no {
        for t in 0..no {
            let mut cx = BoundedComplex::new(m);
            cx.set_term(0, c.base.comp(s, t).clone());
            complexes.insert((0i32, s, t), cx);
        }
    }
    for w in 1..=d {
        // terms per cohomological degree n
        let mut terms: BTreeMap<usize, SumTerm> = BTreeMap::new();
        for n in 1..=w {
            let mut pieces = Vec::new();
            for comp in compositions(w, n) {
                let factors: Vec<&Bimodule> = comp.iter().map(|&i| c.component(i)).collect();
                pieces.push((comp, tensor_chain(&factors)?));
            }
            terms.insert(n, SumTerm::build(m, no, pieces));
        }
        for s in 0..no {
            for t in 0..no {
                let mut cx = BoundedComplex::new(m);
                for (&n, term) in &terms {
                    cx.set_term(n as i32, term.module(no, s, t).clone());
                }
                for n in 1..w {
                    let src = &terms[&n];
                    let tgt = &terms[&(n + 1)];
                    let map = cobar_differential(c, src, tgt, s, t)?;
                    cx.set_diff(n as i32, map);
                }
                complexes.insert((w as i32, s, t), cx);
            }
        }
    }
    Ok(ComplexFamily {
        modulus: m,
        complexes,
    })
}

/// Differential of the reduced cobar complex between sum terms: the
/// alternating sum over slots of the split comultiplications.
fn cobar_differential(
    c: &GradedCoring,
    src: &SumTerm,
    tgt: &SumTerm,
    s: usize,
    t: usize,
) -> Result<ModuleMap> {
    let no = c.base.objects.len();
    let m = c.base.modulus;
    let src_sum = src.module(no, s, t).clone();
    let tgt_sum = tgt.module(no, s, t).clone();
    let mut total = ModuleMap::zero(src_sum.clone(), tgt_sum.clone());
    for (pi, (comp, ct)) in src.pieces.iter().enumerate() {
        let n = comp.len();
        for slot in 0..n {
            let ij = comp[slot];
            if ij < 2 {
                continue;
            }
            for a in 1..ij {
                let b = ij - a;
                // target composition
                let mut tcomp = comp.clone();
                tcomp.splice(slot..=slot, [a, b]);
                let Some(ti) = tgt.pieces.iter().position(|(tc, _)| *tc == tcomp) else {
                    continue;
                };
                let (_, tct) = &tgt.pieces[ti];
                // a missing split is the zero comultiplication
                let Some(split) = c.split(a, b) else {
                    continue;
                };
                // piece map on canonical generators
                let src_mod = ct.module(s, t).clone();
                let tgt_mod = tct.module(s, t).clone();
                let mut mat = MatZm::zeros(tgt_mod.rank(), src_mod.rank(), m);
                for g in 0..src_mod.rank() {
                    let mut e = src_mod.zero_element();
                    e[g] = 1;
                    let pure = ct.comp(s, t).lift(&e);
                    let mut acc = vec![0u64; tct.comp(s, t).basis.len()];
                    for (bi, belem) in ct.comp(s, t).basis.iter().enumerate() {
                        if pure[bi] == 0 {
                            continue;
                        }
                        let lo = belem.path[slot];
                        let hi = belem.path[slot + 1];
                        let cslot = c.component(ij).comp(lo, hi);
                        let mut x = cslot.zero_element();
                        x[belem.gens[slot]] = 1;
                        let sp = split.maps[lo * no + hi].apply(&x);
                        let sp_pure = split.pair.comp(lo, hi).lift(&sp);
                        for (ppi, pelem) in split.pair.comp(lo, hi).basis.iter().enumerate() {
                            if sp_pure[ppi] == 0 {
                                continue;
                            }
                            let mut path = belem.path[..=slot].to_vec();
                            path.push(pelem.path[1]);
                            path.extend_from_slice(&belem.path[slot + 1..]);
                            let mut gens = belem.gens[..slot].to_vec();
                            gens.push(pelem.gens[0]);
                            gens.push(pelem.gens[1]);
                            gens.extend_from_slice(&belem.gens[slot + 1..]);
                            if let Some(ix) = tct.comp(s, t).basis_index(&path, &gens) {
                                acc[ix] = ((acc[ix] as u128
                                    + pure[bi] as u128 * sp_pure[ppi] as u128)
                                    % m as u128) as u64;
                            }
                        }
                    }
                    let mut coords = tct.comp(s, t).canonicalize(&acc);
                    if slot % 2 == 1 {
                        coords = tgt_mod.neg(&coords);
                    }
                    for (r, &cv) in coords.iter().enumerate() {
                        mat[(r, g)] = cv;
                    }
                }
                let piece_map = ModuleMap::new(src_mod, tgt_mod, mat);
                let contrib = tgt.sums[s * no + t].1[ti]
                    .compose(&piece_map)
                    .compose(&src.sums[s * no + t].2[pi]);
                total = total.add(&contrib);
            }
        }
    }
    Ok(total)
}

/// The reduced bar complex family of a graded ring: homological degree =
/// number of tensor factors; stored cohomologically at position -n so
/// differentials ascend. Indexed by internal degree w.
pub fn bar_family(a: &BigGradedRing, d: usize) -> Result<ComplexFamily> {
    let no = a.objects().len();
    let m = a.modulus();
    let mut complexes = BTreeMap::new();
    for s in 0..no {
        for t in 0..no {
            let mut cx = BoundedComplex::new(m);
            cx.set_term(0, a.base.comp(s, t).clone());
            complexes.insert((0i32, s, t), cx);
        }
    }
    for w in 1..=d {
        let mut terms: BTreeMap<usize, SumTerm> = BTreeMap::new();
        for n in 1..=w {
            let mut pieces = Vec::new();
            for comp in compositions(w, n) {
                let bims: Vec<Bimodule> = comp.iter().map(|&i| a.degree_bimodule(i)).collect();
                let refs: Vec<&Bimodule> = bims.iter().collect();
                pieces.push((comp, tensor_chain(&refs)?));
            }
            terms.insert(n, SumTerm::build(m, no, pieces));
        }
        for s in 0..no {
            for t in 0..no {
                let mut cx = BoundedComplex::new(m);
                for (&n, term) in &terms {
                    cx.set_term(-(n as i32), term.module(no, s, t).clone());
                }
                for n in 2..=w {
                    let src = &terms[&n];
                    let tgt = &terms[&(n - 1)];
                    let map = bar_differential(a, src, tgt, s, t)?;
                    cx.set_diff(-(n as i32), map);
                }
                complexes.insert((w as i32, s, t), cx);
            }
        }
    }
    Ok(ComplexFamily {
        modulus: m,
        complexes,
    })
}

/// Bar differential: alternating sum over adjacent slot multiplications.
fn bar_differential(
    a: &BigGradedRing,
    src: &SumTerm,
    tgt: &SumTerm,
    s: usize,
    t: usize,
) -> Result<ModuleMap> {
    let no = a.objects().len();
    let m = a.modulus();
    let src_sum = src.module(no, s, t).clone();
    let tgt_sum = tgt.module(no, s, t).clone();
    let mut total = ModuleMap::zero(src_sum.clone(), tgt_sum.clone());
    for (pi, (comp, ct)) in src.pieces.iter().enumerate() {
        let n = comp.len();
        for slot in 0..n - 1 {
            let (da, db) = (comp[slot], comp[slot + 1]);
            let mut tcomp = comp.clone();
            tcomp.splice(slot..=slot + 1, [da + db]);
            let Some(ti) = tgt.pieces.iter().position(|(tc, _)| *tc == tcomp) else {
                continue;
            };
            let (_, tct) = &tgt.pieces[ti];
            let src_mod = ct.module(s, t).clone();
            let tgt_mod = tct.module(s, t).clone();
            let mut mat = MatZm::zeros(tgt_mod.rank(), src_mod.rank(), m);
            for g in 0..src_mod.rank() {
                let mut e = src_mod.zero_element();
                e[g] = 1;
                let pure = ct.comp(s, t).lift(&e);
                let mut acc = vec![0u64; tct.comp(s, t).basis.len()];
                for (bi, belem) in ct.comp(s, t).basis.iter().enumerate() {
                    if pure[bi] == 0 {
                        continue;
                    }
                    let lo = belem.path[slot];
                    let mid = belem.path[slot + 1];
                    let hi = belem.path[slot + 2];
                    let ca = a.component(da, lo, mid);
                    let cb = a.component(db, mid, hi);
                    let mut x = ca.zero_element();
                    x[belem.gens[slot]] = 1;
                    let mut y = cb.zero_element();
                    y[belem.gens[slot + 1]] = 1;
                    let prod = a.multiply(da, lo, mid, &x, db, hi, &y);
                    let mut path = belem.path[..=slot].to_vec();
                    path.extend_from_slice(&belem.path[slot + 2..]);
                    for (gp, &cv) in prod.iter().enumerate() {
                        if cv == 0 {
                            continue;
                        }
                        let mut gens = belem.gens[..slot].to_vec();
                        gens.push(gp);
                        gens.extend_from_slice(&belem.gens[slot + 2..]);
                        if let Some(ix) = tct.comp(s, t).basis_index(&path, &gens) {
                            acc[ix] = ((acc[ix] as u128 + cv as u128 * pure[bi] as u128)
                                % m as u128) as u64;
                        }
                    }
                }
                let mut coords = tct.comp(s, t).canonicalize(&acc);
                if slot % 2 == 1 {
                    coords = tgt_mod.neg(&coords);
                }
                for (r, &cv) in coords.iter().enumerate() {
                    mat[(r, g)] = cv;
                }
            }
            let piece_map = ModuleMap::new(src_mod, tgt_mod, mat);
            let contrib = tgt.sums[s * no + t].1[ti]
                .compose(&piece_map)
                .compose(&src.sums[s * no + t].2[pi]);
            total = total.add(&contrib);
        }
    }
    Ok(total)
}

/// The Koszul complexes A (x)_R C (side = Left) or C (x)_R A (Right),
/// one complex per internal degree 1..=d; position -j holds the term
/// with C-part in degree -j.
pub fn koszul_family(
    a: &BigGradedRing,
    dc: &DualCoring,
    side: crate::bigring::Side,
    d: usize,
) -> Result<ComplexFamily> {
    check_duality_low_degrees(a, dc)?;
    let no = a.objects().len();
    let m = a.modulus();
    let c = &dc.coring;
    let mut complexes = BTreeMap::new();
    for w in 1..=d {
        // term_j for j = 0..=w; piece for j = 0 is A_w, for j = w is C_{-w}
        let mut term_mods: BTreeMap<usize, Vec<FinModule>> = BTreeMap::new();
        let mut term_ct: BTreeMap<usize, Option<ChainTensor>> = BTreeMap::new();
        for j in 0..=w {
            if j == 0 {
                let mods = (0..no * no)
                    .map(|i| a.component(w, i / no, i % no))
                    .collect();
                term_mods.insert(j, mods);
                term_ct.insert(j, None);
            } else if j == w {
                let mods = (0..no * no)
                    .map(|i| c.component(w).comp(i / no, i % no).clone())
                    .collect();
                term_mods.insert(j, mods);
                term_ct.insert(j, None);
            } else {
                let abim = a.degree_bimodule(w - j);
                let ct = match side {
                    crate::bigring::Side::Left => tensor_chain(&[&abim, c.component(j)])?,
                    crate::bigring::Side::Right => tensor_chain(&[c.component(j), &abim])?,
                };
                let mods = (0..no * no).map(|i| ct.module(i / no, i % no).clone()).collect();
                term_mods.insert(j, mods);
                term_ct.insert(j, Some(ct));
            }
        }
        for s in 0..no {
            for t in 0..no {
                let mut cx = BoundedComplex::new(m);
                for j in 0..=w {
                    cx.set_term(-(j as i32), term_mods[&j][s * no + t].clone());
                }
                for j in 1..=w {
                    let map = koszul_differential(
                        a,
                        dc,
                        side,
                        w,
                        j,
                        s,
                        t,
                        term_ct[&j].as_ref(),
                        term_ct[&(j - 1)].as_ref(),
                        &term_mods[&j][s * no + t],
                        &term_mods[&(j - 1)][s * no + t],
                    )?;
                    cx.set_diff(-(j as i32), map);
                }
                complexes.insert((w as i32, s, t), cx);
            }
        }
    }
    Ok(ComplexFamily {
        modulus: m,
        complexes,
    })
}

/// C_{-1} must be isomorphic to A_1 along the stored inclusion, and the
/// image of C_{-2} must multiply to zero in A_2.
fn check_duality_low_degrees(a: &BigGradedRing, dc: &DualCoring) -> Result<()> {
    let no = a.objects().len();
    for s in 0..no {
        for t in 0..no {
            let inc = &dc.inclusions[0][s * no + t];
            if !inc.kernel().0.is_zero() || !inc.cokernel().0.is_zero() {
                return Err(Error::DualityMismatch(format!(
                    "C_-1 is not identified with A_1 at ({s},{t})"
                )));
            }
        }
    }
    // multiplication must kill C_{-2}
    let a1 = a.degree_bimodule(1);
    let t2 = tensor_chain(&[&a1, &a1])?;
    for s in 0..no {
        for t in 0..no {
            let c2 = dc.coring.component(2).comp(s, t);
            let inc = &dc.inclusions[1][s * no + t];
            for g in 0..c2.rank() {
                let mut e = c2.zero_element();
                e[g] = 1;
                let v = inc.apply(&e);
                let pure = t2.comp(s, t).lift(&v);
                // multiply out
                let a2 = a.component(2, s, t);
                let mut acc = a2.zero_element();
                for (bi, b) in t2.comp(s, t).basis.iter().enumerate() {
                    if pure[bi] == 0 {
                        continue;
                    }
                    let mid = b.path[1];
                    let ca = a.component(1, s, mid);
                    let cb = a.component(1, mid, t);
                    let mut x = ca.zero_element();
                    x[b.gens[0]] = 1;
                    let mut y = cb.zero_element();
                    y[b.gens[1]] = 1;
                    let prod = a.multiply(1, s, mid, &x, 1, t, &y);
                    for (k, &cv) in prod.iter().enumerate() {
                        acc[k] = ((acc[k] as u128 + cv as u128 * pure[bi] as u128)
                            % a.modulus() as u128) as u64;
                    }
                }
                if !a2.is_zero_element(&acc) {
                    return Err(Error::DualityMismatch(format!(
                        "C_-2 does not multiply to zero in A_2 at ({s},{t})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn koszul_differential(
    a: &BigGradedRing,
    dc: &DualCoring,
    side: crate::bigring::Side,
    w: usize,
    j: usize,
    s: usize,
    t: usize,
    src_ct: Option<&ChainTensor>,
    tgt_ct: Option<&ChainTensor>,
    src_mod: &FinModule,
    tgt_mod: &FinModule,
) -> Result<ModuleMap> {
    let no = a.objects().len();
    let m = a.modulus();
    let c = &dc.coring;
    let i_deg = w - j;
    let mut mat = MatZm::zeros(tgt_mod.rank(), src_mod.rank(), m);
    // enumerate source pure data as (a-part gen, c-part gen, mid) triples
    // src term: j == w: pure C_{-w}; else pair tensor
    for g in 0..src_mod.rank() {
        let mut e = src_mod.zero_element();
        e[g] = 1;
        // collect (coeff, a_obj_lo, a_gen or none, mid, c_gen)
        struct PurePair {
            coeff: u64,
            a_gen: Option<usize>,
            mid: usize,
            c_gen: usize,
        }
        let mut pures: Vec<PurePair> = Vec::new();
        if j == w {
            pures.push(PurePair {
                coeff: 0,
                a_gen: None,
                mid: 0,
                c_gen: 0,
            });
            pures.clear();
            for (ix, &cv) in e.iter().enumerate() {
                if cv != 0 {
                    pures.push(PurePair {
                        coeff: cv,
                        a_gen: None,
                        mid: match side {
                            crate::bigring::Side::Left => s,
                            crate::bigring::Side::Right => t,
                        },
                        c_gen: ix,
                    });
                }
            }
        } else {
            let ct = src_ct.unwrap();
            let pure = ct.comp(s, t).lift(&e);
            for (bi, b) in ct.comp(s, t).basis.iter().enumerate() {
                if pure[bi] == 0 {
                    continue;
                }
                let (a_gen, c_gen) = match side {
                    crate::bigring::Side::Left => (b.gens[0], b.gens[1]),
                    crate::bigring::Side::Right => (b.gens[1], b.gens[0]),
                };
                pures.push(PurePair {
                    coeff: pure[bi],
                    a_gen: Some(a_gen),
                    mid: b.path[1],
                    c_gen,
                });
            }
        }
        // apply the differential to each pure pair
        let mut acc_tgt = vec![0u64; tgt_mod.rank()];
        let mut acc_pure: Vec<u64> = match tgt_ct {
            Some(ct) => vec![0u64; ct.comp(s, t).basis.len()],
            None => vec![0u64; tgt_mod.rank()],
        };
        for pp in &pures {
            // the C-slot object pair
            let (c_lo, c_hi) = match side {
                crate::bigring::Side::Left => (pp.mid, t),
                crate::bigring::Side::Right => (s, pp.mid),
            };
            let cj = c.component(j).comp(c_lo, c_hi);
            let mut cx = cj.zero_element();
            cx[pp.c_gen] = 1;
            // split off one C_{-1}; for j = 1 the "split" is the identity
            // into C_{-1} itself
            let split_terms: Vec<(u64, usize, usize, usize)>;
            // (coeff, c1_gen, rest_gen, mid2) with mid2 between c1 and rest
            if j == 1 {
                split_terms = vec![(1, pp.c_gen, 0, 0)];
            } else {
                let (ia, ib) = match side {
                    crate::bigring::Side::Left => (1, j - 1),
                    crate::bigring::Side::Right => (j - 1, 1),
                };
                let Some(split) = c.split(ia, ib) else {
                    continue;
                };
                let sp = split.maps[c_lo * no + c_hi].apply(&cx);
                let sp_pure = split.pair.comp(c_lo, c_hi).lift(&sp);
                let mut v = Vec::new();
                for (ppi, pelem) in split.pair.comp(c_lo, c_hi).basis.iter().enumerate() {
                    if sp_pure[ppi] == 0 {
                        continue;
                    }
                    v.push((sp_pure[ppi], pelem.gens[0], pelem.gens[1], pelem.path[1]));
                }
                split_terms = v;
            }
            for &(sc, g1, g2, mid2) in &split_terms {
                match side {
                    crate::bigring::Side::Left => {
                        // a (x) c : split c -> c1 (x) c'; multiply a * c1
                        let (c1_gen, rest_gen) = (g1, g2);
                        let (c1_lo, c1_hi) = if j == 1 {
                            (c_lo, c_hi)
                        } else {
                            (c_lo, mid2)
                        };
                        // identify the C_{-1} generator with A_1 coordinates
                        let a1_coords = c1_as_a1(dc, c1_lo, c1_hi, c1_gen);
                        // multiply A_i x A_1 -> A_{i+1}
                        let mut left = a.component(i_deg, s, pp.mid).zero_element();
                        if let Some(ag) = pp.a_gen {
                            left[ag] = 1;
                        } else if i_deg == 0 {
                            // j == w: the A-part is the unit
                            left = a.base.unit(s).to_vec();
                        }
                        for (a1g, &a1c) in a1_coords.iter().enumerate() {
                            if a1c == 0 {
                                continue;
                            }
                            let mut y = a.component(1, c1_lo, c1_hi).zero_element();
                            y[a1g] = 1;
                            let prod = if i_deg == 0 {
                                let mut out = a.component(1, c1_lo, c1_hi).zero_element();
                                for (k, &cv) in y.iter().enumerate() {
                                    let _ = k;
                                    let _ = cv;
                                    out = y.clone();
                                    break;
                                }
                                // multiply by the unit coefficientwise
                                let mut scaled = out;
                                for v in scaled.iter_mut() {
                                    *v = (*v as u128 * 1) as u64;
                                }
                                scaled
                            } else {
                                a.multiply(i_deg, s, pp.mid, &left, 1, c1_hi, &y)
                            };
                            // assemble target: A_{i+1} (x) C_{-(j-1)} at mid2/c_hi
                            let coeff = (pp.coeff as u128 * sc as u128 % m as u128
                                * a1c as u128) % m as u128;
                            accumulate_koszul_target(
                                side, a, c, tgt_ct, tgt_mod, w, j, s, t, c1_hi, rest_gen,
                                &prod, coeff as u64, &mut acc_pure, &mut acc_tgt,
                            );
                        }
                    }
                    crate::bigring::Side::Right => {
                        // c (x) a : split c -> c' (x) c1; multiply c1 * a
                        let (rest_gen, c1_gen) = (g1, g2);
                        let (c1_lo, c1_hi) = if j == 1 {
                            (c_lo, c_hi)
                        } else {
                            (mid2, c_hi)
                        };
                        let a1_coords = c1_as_a1(dc, c1_lo, c1_hi, c1_gen);
                        let mut right = a.component(i_deg, pp.mid, t).zero_element();
                        if let Some(ag) = pp.a_gen {
                            right[ag] = 1;
                        }
                        for (a1g, &a1c) in a1_coords.iter().enumerate() {
                            if a1c == 0 {
                                continue;
                            }
                            let mut y = a.component(1, c1_lo, c1_hi).zero_element();
                            y[a1g] = 1;
                            let prod = if i_deg == 0 {
                                y.clone()
                            } else {
                                a.multiply(1, c1_lo, c1_hi, &y, i_deg, t, &right)
                            };
                            let coeff = (pp.coeff as u128 * sc as u128 % m as u128
                                * a1c as u128) % m as u128;
                            accumulate_koszul_target(
                                side, a, c, tgt_ct, tgt_mod, w, j, s, t, c1_lo, rest_gen,
                                &prod, coeff as u64, &mut acc_pure, &mut acc_tgt,
                            );
                        }
                    }
                }
            }
        }
        let coords = match tgt_ct {
            Some(ct) => ct.comp(s, t).canonicalize(&acc_pure),
            None => tgt_mod.reduce(&acc_tgt),
        };
        for (r, &cv) in coords.iter().enumerate() {
            mat[(r, g)] = cv;
        }
    }
    Ok(ModuleMap::new(src_mod.clone(), tgt_mod.clone(), mat))
}

/// The C_{-1} generator expressed in A_1 canonical coordinates through
/// the tensor-power inclusion (pure chains of length one are A_1 bases).
fn c1_as_a1(dc: &DualCoring, lo: usize, hi: usize, gen: usize) -> Vec<u64> {
    let no = dc.coring.base.objects.len();
    let inc = &dc.inclusions[0][lo * no + hi];
    let c1 = dc.coring.component(1).comp(lo, hi);
    let mut e = c1.zero_element();
    e[gen] = 1;
    let v = inc.apply(&e);
    dc.powers[0].comp(lo, hi).lift(&v)
}

#[allow(clippy::too_many_arguments)]
fn accumulate_koszul_target(
    side: crate::bigring::Side,
    a: &BigGradedRing,
    _c: &GradedCoring,
    tgt_ct: Option<&ChainTensor>,
    _tgt_mod: &FinModule,
    w: usize,
    j: usize,
    s: usize,
    t: usize,
    new_mid: usize,
    rest_gen: usize,
    prod: &[u64],
    coeff: u64,
    acc_pure: &mut [u64],
    acc_tgt: &mut [u64],
) {
    let m = a.modulus();
    match tgt_ct {
        Some(ct) => {
            // pair target: (A-part, C-part) or (C-part, A-part)
            for (pg, &pv) in prod.iter().enumerate() {
                if pv == 0 {
                    continue;
                }
                let (path, gens) = match side {
                    crate::bigring::Side::Left => {
                        (vec![s, new_mid, t], vec![pg, rest_gen])
                    }
                    crate::bigring::Side::Right => {
                        (vec![s, new_mid, t], vec![rest_gen, pg])
                    }
                };
                if let Some(ix) = ct.comp(s, t).basis_index(&path, &gens) {
                    acc_pure[ix] = ((acc_pure[ix] as u128
                        + pv as u128 * coeff as u128)
                        % m as u128) as u64;
                }
            }
        }
        None => {
            // j == 1: target is A_w itself
            let _ = (w, j);
            for (pg, &pv) in prod.iter().enumerate() {
                if pv == 0 {
                    continue;
                }
                acc_tgt[pg] = ((acc_tgt[pg] as u128 + pv as u128 * coeff as u128)
                    % m as u128) as u64;
            }
        }
    }
}

/// Scan a homology family for off-diagonal entries. `diagonal` gives the
/// diagonal position per internal degree w.
fn scan_table(
    family: &ComplexFamily,
    d: usize,
    diagonal: impl Fn(i32) -> i32,
    method: Method,
) -> KoszulVerdict {
    for (&(w, s, t), complex) in &family.complexes {
        let mut positions: Vec<i32> = complex.terms.keys().copied().collect();
        positions.sort();
        for pos in positions {
            if pos == diagonal(w) {
                continue;
            }
            let (h, wit) = complex.homology_with_witness(pos);
            if !h.is_zero() {
                return KoszulVerdict {
                    method,
                    checked_up_to: d,
                    result: VerdictResult::FailedAt {
                        n: pos,
                        i: w,
                        witness: FailureWitness::HomologyClass {
                            component: (s, t),
                            cycle: wit.unwrap_or_default(),
                        },
                    },
                };
            }
        }
    }
    KoszulVerdict {
        method,
        checked_up_to: d,
        result: VerdictResult::KoszulUpTo(d),
    }
}

/// Flatness gate for the cobar and Koszul-complex methods over nonprime
/// moduli: all A_i flat on one side (left or right).
fn flatness_gate(a: &BigGradedRing) -> Result<()> {
    let m = a.modulus();
    if is_prime(m) && a.base.is_scalar_diagonal() {
        return Ok(());
    }
    let mut left_ok = true;
    let mut right_ok = true;
    for n in 1..=a.d_max {
        let bim = a.degree_bimodule(n);
        match crate::bigring::is_flat(&bim, crate::bigring::Side::Left) {
            Ok(f) => left_ok &= f,
            Err(e) => return Err(e),
        }
        match crate::bigring::is_flat(&bim, crate::bigring::Side::Right) {
            Ok(f) => right_ok &= f,
            Err(e) => return Err(e),
        }
    }
    if left_ok || right_ok {
        Ok(())
    } else {
        Err(Error::FlatnessViolated(
            "cobar/koszul-complex methods need all A_i flat on one side".into(),
        ))
    }
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Koszulity verdict by the chosen homological criterion, checked for all
/// (n, i) in the degree-d window. The matrix method lives in matrixcrit.
pub fn koszul_verdict(a: &BigGradedRing, method: Method, d: usize) -> Result<KoszulVerdict> {
    assert!(d >= 2 && d <= a.d_max);
    // every criterion presupposes a quadratic ring; report the failure
    // uniformly so the methods agree on non-quadratic inputs
    let qv = is_quadratic_up_to(a, d)?;
    if !qv.quadratic {
        let deg = qv.first_failure.unwrap_or(2);
        return Ok(KoszulVerdict {
            method,
            checked_up_to: d,
            result: VerdictResult::FailedAt {
                n: 0,
                i: deg as i32,
                witness: FailureWitness::NotQuadratic { degree: deg },
            },
        });
    }
    match method {
        Method::CobarDiagonal => {
            flatness_gate(a)?;
            let p = relations_of(a)?;
            let dc = quadratic_dual_coring(&p, d)?;
            let fam = cobar_family(&dc.coring, d)?;
            Ok(scan_table(&fam, d, |w| w, method))
        }
        Method::BarDiagonal => {
            let fam = bar_family(a, d)?;
            Ok(scan_table(&fam, d, |w| -w, method))
        }
        Method::KoszulComplex => {
            flatness_gate(a)?;
            let p = relations_of(a)?;
            let dc = quadratic_dual_coring(&p, d)?;
            let fam = koszul_family(a, &dc, crate::bigring::Side::Left, d)?;
            // exactness everywhere in internal degrees >= 1
            for (&(w, s, t), complex) in &fam.complexes {
                if w == 0 {
                    continue;
                }
                let mut positions: Vec<i32> = complex.terms.keys().copied().collect();
                positions.sort();
                for pos in positions {
                    let (h, wit) = complex.homology_with_witness(pos);
                    if !h.is_zero() {
                        return Ok(KoszulVerdict {
                            method,
                            checked_up_to: d,
                            result: VerdictResult::FailedAt {
                                n: pos,
                                i: w,
                                witness: FailureWitness::HomologyClass {
                                    component: (s, t),
                                    cycle: wit.unwrap_or_default(),
                                },
                            },
                        });
                    }
                }
            }
            Ok(KoszulVerdict {
                method,
                checked_up_to: d,
                result: VerdictResult::KoszulUpTo(d),
            })
        }
        Method::Lattice => {
            if !is_prime(a.modulus()) {
                return Err(Error::PrimeFieldRequired(
                    "lattice method needs a prime modulus".into(),
                ));
            }
            if !a.base.is_scalar_diagonal() {
                return Err(Error::PrimeFieldRequired(
                    "lattice method needs a scalar-diagonal base; apply restrict_base".into(),
                ));
            }
            let p = relations_of(a)?;
            let no = a.objects().len();
            for w in 3..=d {
                let factors: Vec<&Bimodule> = (0..w).map(|_| &p.a1).collect();
                let tn = tensor_chain(&factors)?;
                for s in 0..no {
                    for t in 0..no {
                        let module = tn.module(s, t).clone();
                        if module.is_zero() {
                            continue;
                        }
                        let mut translates = Vec::new();
                        for pos in 0..=w - 2 {
                            let cols = quadra::translated_relation_cols_pub(&p, &tn, w, pos);
                            let canon: Vec<Vec<u64>> = cols[s * no + t]
                                .iter()
                                .map(|c| tn.comp(s, t).canonicalize(c))
                                .collect();
                            translates
                                .push(MatZm::from_cols(module.rank(), a.modulus(), &canon));
                        }
                        match lattice_is_distributive(&module, &translates, 64, 4096)? {
                            DistributivityOutcome::Distributive { .. } => {}
                            DistributivityOutcome::Violation { x, y, z } => {
                                return Ok(KoszulVerdict {
                                    method,
                                    checked_up_to: d,
                                    result: VerdictResult::FailedAt {
                                        n: w as i32,
                                        i: w as i32,
                                        witness: FailureWitness::LatticeTriple {
                                            component: (s, t),
                                            x,
                                            y,
                                            z,
                                        },
                                    },
                                });
                            }
                        }
                    }
                }
            }
            Ok(KoszulVerdict {
                method,
                checked_up_to: d,
                result: VerdictResult::KoszulUpTo(d),
            })
        }
        Method::Matrix => Err(Error::Invalid(
            "use matrixcrit::matrix_koszulity_check for the matrix method".into(),
        )),
    }
}

/// Outcome of the common-basis distributivity test.
#[derive(Clone, Debug)]
pub enum DistributivityOutcome {
    /// a basis of V such that every listed subspace is spanned by a subset
    Distributive { basis: Vec<Vec<u64>> },
    /// bases of subspaces X, Y, Z in the generated lattice with
    /// (X+Y) n Z != X n Z + Y n Z
    Violation {
        x: Vec<Vec<u64>>,
        y: Vec<Vec<u64>>,
        z: Vec<Vec<u64>>,
    },
}

/// Reduced column-echelon basis of a list of vectors mod p.
fn echelon_basis(p: u64, dim: usize, vecs: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut basis: Vec<Vec<u64>> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for b in &basis {
            let lead = b.iter().position(|&x| x != 0).unwrap();
            if w[lead] != 0 {
                let c = w[lead] % p;
                // w -= c * b (b has leading coefficient 1)
                for k in 0..dim {
                    w[k] = (w[k] + (p - c) * b[k]) % p;
                }
            }
        }
        if w.iter().any(|&x| x != 0) {
            let lead = w.iter().position(|&x| x != 0).unwrap();
            let inv = crate::exactla::mod_inverse(w[lead], p).unwrap();
            for k in 0..dim {
                w[k] = (w[k] * inv) % p;
            }
            // reduce previous basis vectors by w
            for b in basis.iter_mut() {
                if b[lead] != 0 {
                    let c = b[lead];
                    for k in 0..dim {
                        b[k] = (b[k] + (p - c) * w[k] % p) % p;
                    }
                }
            }
            basis.push(w);
            basis.sort_by_key(|b| b.iter().position(|&x| x != 0).unwrap());
        }
    }
    basis
}

fn subspace_sum(p: u64, dim: usize, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut all = a.to_vec();
    all.extend(b.iter().cloned());
    echelon_basis(p, dim, &all)
}

fn subspace_contains(p: u64, dim: usize, space: &[Vec<u64>], v: &[u64]) -> bool {
    let mut w = v.to_vec();
    for b in space {
        let lead = b.iter().position(|&x| x != 0).unwrap();
        if w[lead] != 0 {
            let c = w[lead];
            for k in 0..dim {
                w[k] = (w[k] + (p - c) * b[k] % p) % p;
            }
        }
    }
    w.iter().all(|&x| x == 0)
}

fn subspace_intersect(p: u64, dim: usize, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    // nullspace of [A | B]: intersection vectors are A*u for solutions
    let na = a.len();
    let nb = b.len();
    if na == 0 || nb == 0 {
        return Vec::new();
    }
    let cols = na + nb;
    // gaussian elimination on the dim x cols matrix
    let mut mat: Vec<Vec<u64>> = (0..dim)
        .map(|r| {
            let mut row = Vec::with_capacity(cols);
            for v in a {
                row.push(v[r]);
            }
            for v in b {
                row.push(v[r]);
            }
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        if let Some(r) = (rank..dim).find(|&r| mat[r][c] != 0) {
            mat.swap(rank, r);
            let inv = crate::exactla::mod_inverse(mat[rank][c], p).unwrap();
            for k in 0..cols {
                mat[rank][k] = (mat[rank][k] * inv) % p;
            }
            for rr in 0..dim {
                if rr != rank && mat[rr][c] != 0 {
                    let f = mat[rr][c];
                    for k in 0..cols {
                        mat[rr][k] = (mat[rr][k] + (p - f) * mat[rank][k] % p) % p;
                    }
                }
            }
            pivots.push((rank, c));
            rank += 1;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut vecs = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut sol = vec![0u64; cols];
        sol[free] = 1;
        for &(r, c) in &pivots {
            sol[c] = (p - mat[r][free]) % p;
        }
        // intersection vector = A * u part
        let mut v = vec![0u64; dim];
        for (k, s) in sol.iter().take(na).enumerate() {
            for r in 0..dim {
                v[r] = (v[r] + s * a[k][r]) % p;
            }
        }
        if v.iter().any(|&x| x != 0) {
            vecs.push(v);
        }
    }
    echelon_basis(p, dim, &vecs)
}

/// Common-basis distributivity test for subspaces of a free module over a
/// prime field: true iff a basis of V exists such that every listed
/// subspace is spanned by a subset of it. Equivalent to distributivity of
/// the generated lattice, since coordinate subspaces of a fixed basis
/// form a distributive lattice closed under sum and intersection.
///
/// Fast path: cell decomposition indexed by subsets of the generators,
/// verified. On verification failure, the generated lattice is grown
/// incrementally until a violating triple appears.
pub fn lattice_is_distributive(
    v: &FinModule,
    subspaces: &[MatZm],
    dim_cap: usize,
    closure_cap: usize,
) -> Result<DistributivityOutcome> {
    let p = v.modulus();
    if !is_prime(p) {
        return Err(Error::PrimeFieldRequired(
            "distributivity test needs a prime modulus".into(),
        ));
    }
    let dim = v.rank();
    if dim > dim_cap {
        return Err(Error::DimensionCap(format!("dim {dim} exceeds cap {dim_cap}")));
    }
    let k = subspaces.len();
    if k > 6 {
        return Err(Error::DimensionCap(format!("{k} subspaces exceed the cap of 6")));
    }
    let gens: Vec<Vec<Vec<u64>>> = subspaces
        .iter()
        .map(|sub| {
            let vecs: Vec<Vec<u64>> = (0..sub.cols).map(|j| sub.col(j)).collect();
            echelon_basis(p, dim, &vecs)
        })
        .collect();

    if let Some(basis) = try_cell_basis(p, dim, &gens) {
        return Ok(DistributivityOutcome::Distributive { basis });
    }

    // grow the generated lattice, checking the distributive identity on
    // every new element as it appears
    let mut closure: Vec<Vec<Vec<u64>>> = vec![Vec::new()];
    for g in &gens {
        if !closure.contains(g) {
            closure.push(g.clone());
        }
    }
    for x in 0..closure.len() {
        for y in 0..closure.len() {
            for z in 0..closure.len() {
                let (tx, ty, tz) = (&closure[x], &closure[y], &closure[z]);
                let lhs = subspace_intersect(p, dim, &subspace_sum(p, dim, tx, ty), tz);
                let rhs = subspace_sum(
                    p,
                    dim,
                    &subspace_intersect(p, dim, tx, tz),
                    &subspace_intersect(p, dim, ty, tz),
                );
                if lhs != rhs {
                    return Ok(DistributivityOutcome::Violation {
                        x: tx.clone(),
                        y: ty.clone(),
                        z: tz.clone(),
                    });
                }
            }
        }
    }
    let mut frontier = 0usize;
    while frontier < closure.len() {
        let mut new_elems: Vec<Vec<Vec<u64>>> = Vec::new();
        for i in 0..closure.len() {
            for j in frontier.max(i)..closure.len() {
                for cand in [
                    subspace_sum(p, dim, &closure[i], &closure[j]),
                    subspace_intersect(p, dim, &closure[i], &closure[j]),
                ] {
                    if !closure.contains(&cand) && !new_elems.contains(&cand) {
                        new_elems.push(cand);
                    }
                }
            }
        }
        frontier = closure.len();
        for ne in new_elems {
            // identity checks with the new element in each slot
            for x in 0..closure.len() {
                for y in 0..closure.len() {
                    let triples = [
                        (&closure[x], &closure[y], &ne),
                        (&closure[x], &ne, &closure[y]),
                        (&ne, &closure[x], &closure[y]),
                    ];
                    for (tx, ty, tz) in triples {
                        let lhs = subspace_intersect(p, dim, &subspace_sum(p, dim, tx, ty), tz);
                        let rhs = subspace_sum(
                            p,
                            dim,
                            &subspace_intersect(p, dim, tx, tz),
                            &subspace_intersect(p, dim, ty, tz),
                        );
                        if lhs != rhs {
                            return Ok(DistributivityOutcome::Violation {
                                x: tx.clone(),
                                y: ty.clone(),
                                z: tz.clone(),
                            });
                        }
                    }
                }
            }
            closure.push(ne);
            if closure.len() > closure_cap {
                return Err(Error::BudgetExceeded(format!(
                    "lattice closure exceeded {closure_cap} subspaces"
                )));
            }
        }
    }
    // closure is distributive on all triples but the cell construction
    // failed; this is not expected to happen
    Err(Error::Invalid(
        "internal: lattice closed distributive but no common basis was constructed".into(),
    ))
}

/// Candidate distributing basis from the cell decomposition: for each
/// subset S of generators, the cell U_S = intersection over S, split by
/// the spans of its strict refinements; verified before returning.
fn try_cell_basis(p: u64, dim: usize, gens: &[Vec<Vec<u64>>]) -> Option<Vec<Vec<u64>>> {
    let k = gens.len();
    let full: Vec<Vec<u64>> = {
        let mut all = Vec::new();
        for r in 0..dim {
            let mut e = vec![0u64; dim];
            e[r] = 1;
            all.push(e);
        }
        all
    };
    // U_S for all subsets, indexed by bitmask
    let mut cells: Vec<Vec<Vec<u64>>> = vec![Vec::new(); 1 << k];
    cells[0] = full;
    for mask in 1usize..(1 << k) {
        let low = mask & (mask - 1);
        let bit = (mask ^ low).trailing_zeros() as usize;
        cells[mask] = if low == 0 {
            gens[bit].clone()
        } else {
            subspace_intersect(p, dim, &cells[low], &gens[bit])
        };
    }
    // process masks by decreasing popcount: W_mask extends the span of
    // all U_{mask ∪ {i}} inside U_mask
    let mut order: Vec<usize> = (0..(1 << k)).collect();
    order.sort_by_key(|&m| std::cmp::Reverse(m.count_ones()));
    let mut basis: Vec<Vec<u64>> = Vec::new();
    for &mask in &order {
        let mut inner: Vec<Vec<u64>> = Vec::new();
        for i in 0..k {
            if mask & (1 << i) == 0 {
                inner = subspace_sum(p, dim, &inner, &cells[mask | (1 << i)]);
            }
        }
        // also include already-chosen basis vectors lying in the cell
        let mut span = inner;
        for b in &basis {
            if subspace_contains(p, dim, &cells[mask], b)
                && !subspace_contains(p, dim, &span, b)
            {
                span = subspace_sum(p, dim, &span, &[b.clone()]);
            }
        }
        for w in &cells[mask] {
            if !subspace_contains(p, dim, &span, w) {
                basis.push(w.clone());
                span = subspace_sum(p, dim, &span, &[w.clone()]);
            }
        }
    }
    // verification: independent, spanning, and each generator is the span
    // of the basis vectors it contains
    if echelon_basis(p, dim, &basis).len() != basis.len() || basis.len() != dim {
        return None;
    }
    for g in gens {
        let inside: Vec<Vec<u64>> = basis
            .iter()
            .filter(|b| subspace_contains(p, dim, g, b))
            .cloned()
            .collect();
        if echelon_basis(p, dim, &inside) != *g {
            return None;
        }
    }
    Some(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadra::tests_support::{exterior, one_object, symmetric};

    #[test]
    fn cobar_of_trivial_coring() {
        let base = crate::bigring::BigRing::diagonal_zm(crate::bigring::ObjectSet::single("s"), 2);
        let c = GradedCoring::trivial(base, 3);
        let fam = cobar_family(&c, 3).unwrap();
        let table = fam.homology_table((0, 3), (0, 3));
        assert_eq!(table.rank_at(0, 0), 1);
        for w in 1..=3 {
            for n in 0..=3 {
                assert_eq!(table.rank_at(n, w), 0, "({n},{w})");
            }
        }
    }

    #[test]
    fn cobar_of_dual_numbers_dual_is_diagonal() {
        let p = one_object(2, 1, &[vec![1]]);
        let dc = quadratic_dual_coring(&p, 5).unwrap();
        let fam = cobar_family(&dc.coring, 5).unwrap();
        assert!(fam.is_valid());
        let table = fam.homology_table((0, 5), (0, 5));
        // diagonal cohomology equals A_n for the dual-numbers ring:
        // rank 1 at (0,0) and (1,1), zero everywhere else
        for w in 0..=5i32 {
            for n in 0..=5i32 {
                let expect = usize::from((n, w) == (0, 0) || (n, w) == (1, 1));
                assert_eq!(table.rank_at(n, w), expect, "({n},{w})");
            }
        }
    }

    #[test]
    fn bar_of_free_ring_is_diagonal_in_low_degrees() {
        // tensor ring on one rank-1 generator over Z/2: homology rank 1 at
        // (0,0) and (1,1) only, up to degree 4
        let p = one_object(2, 1, &[]);
        let closure = crate::quadra::quadratic_closure(&p, 4).unwrap();
        let fam = bar_family(&closure.ring, 4).unwrap();
        assert!(fam.is_valid());
        let table = fam.homology_table((-4, 0), (0, 4));
        assert_eq!(table.rank_at(0, 0), 1);
        assert_eq!(table.rank_at(-1, 1), 1);
        for w in 1..=4i32 {
            for n in 1..=4i32 {
                if (n, w) == (1, 1) {
                    continue;
                }
                assert_eq!(table.rank_at(-n, w), 0, "({n},{w})");
            }
        }
    }

    #[test]
    fn bar_of_truncated_ring_is_diagonal() {
        // A_n = 0 for n >= 2 over Z/2 and Z/4: Koszul, bar homology diagonal
        for m in [2u64, 4] {
            let p = one_object(m, 1, &[vec![1]]);
            let closure = crate::quadra::quadratic_closure(&p, 4).unwrap();
            let fam = bar_family(&closure.ring, 4).unwrap();
            assert!(fam.is_valid());
            let table = fam.homology_table((-4, 0), (0, 4));
            for w in 1..=4i32 {
                for n in 1..=4i32 {
                    let expect = if n == w { 1 } else { 0 };
                    assert_eq!(table.rank_at(-n, w), expect, "({n},{w}) over Z/{m}");
                }
            }
        }
    }

    #[test]
    fn koszul_complex_of_exterior_is_exact() {
        let p = exterior(2, 1);
        let closure = crate::quadra::quadratic_closure(&p, 5).unwrap();
        let dc = quadratic_dual_coring(&p, 5).unwrap();
        for side in [crate::bigring::Side::Left, crate::bigring::Side::Right] {
            let fam = koszul_family(&closure.ring, &dc, side, 5).unwrap();
            assert!(fam.is_valid());
            for (&(w, _, _), cx) in &fam.complexes {
                if w == 0 {
                    continue;
                }
                for (&pos, _) in &cx.terms {
                    assert!(cx.homology_at(pos).is_zero(), "w={w} pos={pos}");
                }
            }
        }
    }

    #[test]
    fn wrong_pairing_is_inexact_at_two() {
        // dual of the free presentation (I = 0) paired with the exterior
        // ring: inexact at internal grading 2
        let free = one_object(2, 1, &[]);
        let ext = exterior(2, 1);
        let closure = crate::quadra::quadratic_closure(&ext, 3).unwrap();
        let dc = quadratic_dual_coring(&free, 3).unwrap();
        let fam = koszul_family(&closure.ring, &dc, crate::bigring::Side::Left, 3).unwrap();
        let cx = &fam.complexes[&(2, 0, 0)];
        let inexact = cx.terms.keys().any(|&pos| !cx.homology_at(pos).is_zero());
        assert!(inexact);
    }

    #[test]
    fn verdicts_agree_on_exterior() {
        let p = exterior(2, 2);
        let closure = crate::quadra::quadratic_closure(&p, 5).unwrap();
        for method in [
            Method::CobarDiagonal,
            Method::BarDiagonal,
            Method::KoszulComplex,
            Method::Lattice,
        ] {
            let v = koszul_verdict(&closure.ring, method, 5).unwrap();
            assert!(v.is_koszul(), "{method:?}: {}", v.summary());
        }
    }

    #[test]
    fn verdict_fails_on_tampered_ring() {
        let p = exterior(2, 2);
        let closure = crate::quadra::quadratic_closure(&p, 3).unwrap();
        let mut comps = closure.ring.components().clone();
        comps.insert((3, 0, 0), FinModule::free(2, 1));
        let tampered = BigGradedRing::new(
            closure.ring.base.clone(),
            3,
            comps,
            closure.ring.mult_map().clone(),
        );
        for method in [Method::BarDiagonal, Method::CobarDiagonal] {
            let v = koszul_verdict(&tampered, method, 3).unwrap();
            assert!(!v.is_koszul());
        }
    }

    #[test]
    fn lattice_single_and_double_subspaces_distributive() {
        let v = FinModule::free(2, 3);
        let s1 = MatZm::from_cols(3, 2, &[vec![1, 0, 0]]);
        let s2 = MatZm::from_cols(3, 2, &[vec![0, 1, 0], vec![1, 0, 0]]);
        match lattice_is_distributive(&v, &[s1.clone()], 12, 4096).unwrap() {
            DistributivityOutcome::Distributive { .. } => {}
            _ => panic!("single subspace must be distributive"),
        }
        match lattice_is_distributive(&v, &[s1, s2], 12, 4096).unwrap() {
            DistributivityOutcome::Distributive { .. } => {}
            _ => panic!("two subspaces must be distributive"),
        }
    }

    #[test]
    fn three_lines_in_plane_not_distributive() {
        let v = FinModule::free(2, 2);
        let x = MatZm::from_cols(2, 2, &[vec![1, 0]]);
        let y = MatZm::from_cols(2, 2, &[vec![0, 1]]);
        let z = MatZm::from_cols(2, 2, &[vec![1, 1]]);
        match lattice_is_distributive(&v, &[x, y, z], 12, 4096).unwrap() {
            DistributivityOutcome::Violation { .. } => {}
            _ => panic!("three distinct lines are not distributive"),
        }
    }

    #[test]
    fn verdicts_agree_on_symmetric_over_z3() {
        let p = symmetric(3, 2);
        let closure = crate::quadra::quadratic_closure(&p, 4).unwrap();
        for method in [
            Method::CobarDiagonal,
            Method::BarDiagonal,
            Method::KoszulComplex,
            Method::Lattice,
        ] {
            let v = koszul_verdict(&closure.ring, method, 4).unwrap();
            assert!(v.is_koszul(), "{method:?}: {}", v.summary());
        }
    }

    #[test]
    fn lattice_method_refuses_nonprime() {
        let p = one_object(4, 1, &[vec![1]]);
        let closure = crate::quadra::quadratic_closure(&p, 3).unwrap();
        let err = koszul_verdict(&closure.ring, Method::Lattice, 3);
        assert!(matches!(err, Err(Error::PrimeFieldRequired(_))));
    }

    #[test]
    fn diagonal_cobar_recovers_components() {
        // diagonal cobar cohomology of the dual coring is isomorphic to
        // A_n componentwise for quadratic A
        let p = exterior(2, 2);
        let closure = crate::quadra::quadratic_closure(&p, 4).unwrap();
        let dc = quadratic_dual_coring(&p, 4).unwrap();
        let fam = cobar_family(&dc.coring, 4).unwrap();
        for w in 1..=4i32 {
            let cx = &fam.complexes[&(w, 0, 0)];
            let h = cx.homology_at(w);
            assert_eq!(h, closure.ring.component(w as usize, 0, 0), "degree {w}");
        }
    }
}

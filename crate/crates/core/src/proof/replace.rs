// SPDX-License-Identifier: Apache-2.0

//! Replacing a variable by a ⪯-greater one inside a proof.
//!
//! `M[α/α']` renames `α` in every annotation of `M`. Hypotheses whose type
//! mentions `α` then have the wrong type; each is replaced by a proof of
//! its renamed type, which exists because `α ⪯ α'`. The result is
//! re-checked before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{check, search_proof, Context, ProofTerm, TermVar};
use crate::formula::{Formula, Var};
use crate::strategy::QuasiOrderRel;

const REPLACE_BUDGET: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplaceError {
    #[error("precondition violated: the proof does not check against {0}")]
    IllTyped(Formula),
    #[error("precondition violated: {alpha} ⪯ {alpha_prime} is not witnessed")]
    NotBelow { alpha: Var, alpha_prime: Var },
    #[error("no proof of the renamed formula {0} was found")]
    ReplacementFailed(Formula),
}

fn fresh_fo(avoid: &BTreeSet<Var>) -> Var {
    Var::fresh_avoiding(avoid)
}

/// `M[from/to]` on first-order variables, renaming term-level binders
/// (`λX`, unpack eigenvariables) that would capture `to`.
pub(crate) fn subst_fo(m: &ProofTerm, from: &Var, to: &Var) -> ProofTerm {
    if from == to {
        return m.clone();
    }
    let b = Box::new;
    let sf = |f: &Formula| f.substitute(from, to);
    let sv = |v: &Var| if v == from { to.clone() } else { v.clone() };
    let rebind = |x: &Var, inner: &[&ProofTerm], extra: &[&Formula]| -> Var {
        let mut avoid: BTreeSet<Var> = inner.iter().flat_map(|t| t.first_order_vars()).collect();
        for f in extra {
            avoid.extend(f.all_vars());
        }
        avoid.insert(from.clone());
        avoid.insert(to.clone());
        avoid.insert(x.clone());
        fresh_fo(&avoid)
    };
    match m {
        ProofTerm::Var(_) => m.clone(),
        ProofTerm::Pair(a, c) => {
            ProofTerm::Pair(b(subst_fo(a, from, to)), b(subst_fo(c, from, to)))
        }
        ProofTerm::App(a, c) => ProofTerm::App(b(subst_fo(a, from, to)), b(subst_fo(c, from, to))),
        ProofTerm::Fst(a) => ProofTerm::Fst(b(subst_fo(a, from, to))),
        ProofTerm::Snd(a) => ProofTerm::Snd(b(subst_fo(a, from, to))),
        ProofTerm::Lam(x, a, body) => ProofTerm::Lam(x.clone(), sf(a), b(subst_fo(body, from, to))),
        ProofTerm::TLam(x, body) => {
            if x == from {
                m.clone()
            } else if x == to {
                let z = rebind(x, &[body], &[]);
                let renamed = subst_fo(body, x, &z);
                ProofTerm::TLam(z, b(subst_fo(&renamed, from, to)))
            } else {
                ProofTerm::TLam(x.clone(), b(subst_fo(body, from, to)))
            }
        }
        ProofTerm::TApp(a, y) => ProofTerm::TApp(b(subst_fo(a, from, to)), sv(y)),
        ProofTerm::Inl(ann, a) => ProofTerm::Inl(sf(ann), b(subst_fo(a, from, to))),
        ProofTerm::Inr(ann, a) => ProofTerm::Inr(sf(ann), b(subst_fo(a, from, to))),
        ProofTerm::Case {
            scrutinee,
            left,
            right,
        } => ProofTerm::Case {
            scrutinee: b(subst_fo(scrutinee, from, to)),
            left: (left.0.clone(), sf(&left.1), b(subst_fo(&left.2, from, to))),
            right: (
                right.0.clone(),
                sf(&right.1),
                b(subst_fo(&right.2, from, to)),
            ),
        },
        ProofTerm::Pack(a, y, ann) => ProofTerm::Pack(b(subst_fo(a, from, to)), sv(y), sf(ann)),
        ProofTerm::Unpack {
            hyp,
            eigen,
            hyp_ty,
            scrutinee,
            body,
        } => {
            let scrutinee = b(subst_fo(scrutinee, from, to));
            if eigen == from {
                return ProofTerm::Unpack {
                    hyp: hyp.clone(),
                    eigen: eigen.clone(),
                    hyp_ty: hyp_ty.clone(),
                    scrutinee,
                    body: body.clone(),
                };
            }
            let (eigen, hyp_ty, body) = if eigen == to {
                let z = rebind(eigen, &[body], &[hyp_ty]);
                (
                    z.clone(),
                    hyp_ty.substitute(eigen, &z),
                    subst_fo(body, eigen, &z),
                )
            } else {
                (eigen.clone(), hyp_ty.clone(), (**body).clone())
            };
            ProofTerm::Unpack {
                hyp: hyp.clone(),
                eigen,
                hyp_ty: sf(&hyp_ty),
                scrutinee,
                body: b(subst_fo(&body, from, to)),
            }
        }
        ProofTerm::Abort(ann, a) => ProofTerm::Abort(sf(ann), b(subst_fo(a, from, to))),
    }
}

struct TermSubst<'a> {
    map: BTreeMap<TermVar, ProofTerm>,
    /// Free term variables of the replacement terms.
    blocked_terms: BTreeSet<TermVar>,
    /// First-order variables the replacement terms mention.
    blocked_fo: BTreeSet<Var>,
    ctx: &'a Context,
    counter: usize,
}

impl TermSubst<'_> {
    fn fresh_term(&mut self, m: &ProofTerm) -> TermVar {
        let used = m.free_term_vars();
        loop {
            let name = TermVar::new(format!("r{}", self.counter));
            self.counter += 1;
            if !used.contains(&name)
                && !self.blocked_terms.contains(&name)
                && self.ctx.lookup(&name).is_none()
            {
                return name;
            }
        }
    }

    fn fresh_fo(&self, m: &ProofTerm) -> Var {
        let mut avoid = m.first_order_vars();
        avoid.extend(self.blocked_fo.iter().cloned());
        avoid.extend(self.ctx.free_vars());
        fresh_fo(&avoid)
    }

    /// Goes under a term binder `x`, renaming it if it would capture a free
    /// variable of a replacement.
    fn under(&mut self, x: &TermVar, body: &ProofTerm) -> (TermVar, ProofTerm) {
        let shadowed = self.map.remove(x);
        let (x2, body2) = if self.blocked_terms.contains(x) {
            let z = self.fresh_term(body);
            let mut rename = BTreeMap::new();
            rename.insert(x.clone(), ProofTerm::Var(z.clone()));
            let renamed = rename_terms(body, &rename);
            (z, self.apply(&renamed))
        } else {
            (x.clone(), self.apply(body))
        };
        if let Some(s) = shadowed {
            self.map.insert(x.clone(), s);
        }
        (x2, body2)
    }

    fn apply(&mut self, m: &ProofTerm) -> ProofTerm {
        let b = Box::new;
        match m {
            ProofTerm::Var(x) => self.map.get(x).cloned().unwrap_or_else(|| m.clone()),
            ProofTerm::Pair(a, c) => ProofTerm::Pair(b(self.apply(a)), b(self.apply(c))),
            ProofTerm::App(a, c) => ProofTerm::App(b(self.apply(a)), b(self.apply(c))),
            ProofTerm::Fst(a) => ProofTerm::Fst(b(self.apply(a))),
            ProofTerm::Snd(a) => ProofTerm::Snd(b(self.apply(a))),
            ProofTerm::Lam(x, ty, body) => {
                let (x, body) = self.under(x, body);
                ProofTerm::Lam(x, ty.clone(), b(body))
            }
            ProofTerm::TLam(x, body) => {
                if self.blocked_fo.contains(x) {
                    let z = self.fresh_fo(body);
                    let renamed = subst_fo(body, x, &z);
                    ProofTerm::TLam(z, b(self.apply(&renamed)))
                } else {
                    ProofTerm::TLam(x.clone(), b(self.apply(body)))
                }
            }
            ProofTerm::TApp(a, y) => ProofTerm::TApp(b(self.apply(a)), y.clone()),
            ProofTerm::Inl(ann, a) => ProofTerm::Inl(ann.clone(), b(self.apply(a))),
            ProofTerm::Inr(ann, a) => ProofTerm::Inr(ann.clone(), b(self.apply(a))),
            ProofTerm::Case {
                scrutinee,
                left,
                right,
            } => {
                let scrutinee = b(self.apply(scrutinee));
                let (x, l) = self.under(&left.0, &left.2);
                let (y, r) = self.under(&right.0, &right.2);
                ProofTerm::Case {
                    scrutinee,
                    left: (x, left.1.clone(), b(l)),
                    right: (y, right.1.clone(), b(r)),
                }
            }
            ProofTerm::Pack(a, y, ann) => ProofTerm::Pack(b(self.apply(a)), y.clone(), ann.clone()),
            ProofTerm::Unpack {
                hyp,
                eigen,
                hyp_ty,
                scrutinee,
                body,
            } => {
                let scrutinee = b(self.apply(scrutinee));
                let (eigen, hyp_ty, body) = if self.blocked_fo.contains(eigen) {
                    let z = self.fresh_fo(body);
                    (
                        z.clone(),
                        hyp_ty.substitute(eigen, &z),
                        subst_fo(body, eigen, &z),
                    )
                } else {
                    (eigen.clone(), hyp_ty.clone(), (**body).clone())
                };
                let (hyp, body) = self.under(hyp, &body);
                ProofTerm::Unpack {
                    hyp,
                    eigen,
                    hyp_ty,
                    scrutinee,
                    body: b(body),
                }
            }
            ProofTerm::Abort(ann, a) => ProofTerm::Abort(ann.clone(), b(self.apply(a))),
        }
    }
}

/// Plain renaming of term variables whose targets cannot be captured.
fn rename_terms(m: &ProofTerm, map: &BTreeMap<TermVar, ProofTerm>) -> ProofTerm {
    let empty = Context::new();
    TermSubst {
        map: map.clone(),
        blocked_terms: BTreeSet::new(),
        blocked_fo: BTreeSet::new(),
        ctx: &empty,
        counter: 0,
    }
    .apply(m)
}

/// `M[x₁ := N₁, ...]`, simultaneous and capture-avoiding for both kinds of
/// variables.
pub(crate) fn subst_terms(
    ctx: &Context,
    m: &ProofTerm,
    map: BTreeMap<TermVar, ProofTerm>,
) -> ProofTerm {
    let blocked_terms = map.values().flat_map(|n| n.free_term_vars()).collect();
    let blocked_fo = map.values().flat_map(|n| n.first_order_vars()).collect();
    TermSubst {
        map,
        blocked_terms,
        blocked_fo,
        ctx,
        counter: 0,
    }
    .apply(m)
}

/// Given `Γ ⊢ M : τ` and `α ⪯_Γ α'`, a proof of `τ[α/α']` from the same Γ.
pub fn replace_var_in_proof(
    ctx: &Context,
    m: &ProofTerm,
    tau: &Formula,
    alpha: &Var,
    alpha_prime: &Var,
    ord: &QuasiOrderRel,
) -> Result<(ProofTerm, Formula), ReplaceError> {
    if !check(ctx, m, tau) {
        return Err(ReplaceError::IllTyped(tau.clone()));
    }
    if alpha == alpha_prime {
        return Ok((m.clone(), tau.clone()));
    }
    if !ord.holds(alpha, alpha_prime) {
        return Err(ReplaceError::NotBelow {
            alpha: alpha.clone(),
            alpha_prime: alpha_prime.clone(),
        });
    }
    let tau2 = tau.substitute(alpha, alpha_prime);
    let m1 = subst_fo(m, alpha, alpha_prime);
    let mut map = BTreeMap::new();
    let mut ok = true;
    for x in m1.free_term_vars() {
        let Some(ty) = ctx.lookup(&x) else { continue };
        if !ty.has_free(alpha) {
            continue;
        }
        let ty2 = ty.substitute(alpha, alpha_prime);
        match search_proof(ctx, &ty2, REPLACE_BUDGET).proof() {
            Some(n) => {
                map.insert(x, n.clone());
            }
            None => {
                ok = false;
                break;
            }
        }
    }
    if ok {
        let m2 = subst_terms(ctx, &m1, map);
        if check(ctx, &m2, &tau2) {
            return Ok((m2, tau2));
        }
    }
    match search_proof(ctx, &tau2, REPLACE_BUDGET).proof() {
        Some(n) => Ok((n.clone(), tau2)),
        None => Err(ReplaceError::ReplacementFailed(tau2)),
    }
}

/// Replaces, one at a time, every non-maximal free variable of Γ by its
/// maximal representative. Returns the new proof and the formula it proves.
pub fn maximalize_proof(
    ctx: &Context,
    m: &ProofTerm,
    tau: &Formula,
    ord: &QuasiOrderRel,
) -> Result<(ProofTerm, Formula), ReplaceError> {
    if !check(ctx, m, tau) {
        return Err(ReplaceError::IllTyped(tau.clone()));
    }
    let maximal = ord.maximal_vars();
    let mut cur = (m.clone(), tau.clone());
    for x in ord.vars() {
        if maximal.contains(x) {
            continue;
        }
        let Some(rep) = ord.maximal_rep(x) else {
            continue;
        };
        cur = replace_var_in_proof(ctx, &cur.0, &cur.1, x, &rep, ord)?;
    }
    Ok(cur)
}

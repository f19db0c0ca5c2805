// SPDX-License-Identifier: Apache-2.0

use super::{Context, ProofTerm};
use crate::formula::Formula;

/// `Γ ⊢ M : τ`, with types compared up to renaming of bound variables.
pub fn check(ctx: &Context, m: &ProofTerm, tau: &Formula) -> bool {
    infer(ctx, m).is_some_and(|t| t.alpha_eq(tau))
}

/// The type of `M` in `Γ`, if `M` is well typed. Every constructor carries
/// enough annotation to make the type unique up to bound renaming.
pub fn infer(ctx: &Context, m: &ProofTerm) -> Option<Formula> {
    match m {
        ProofTerm::Var(x) => ctx.lookup(x).cloned(),
        ProofTerm::Pair(a, b) => Some(Formula::and(infer(ctx, a)?, infer(ctx, b)?)),
        ProofTerm::Fst(p) => match infer(ctx, p)? {
            Formula::And(a, _) => Some(*a),
            _ => None,
        },
        ProofTerm::Snd(p) => match infer(ctx, p)? {
            Formula::And(_, b) => Some(*b),
            _ => None,
        },
        ProofTerm::Lam(x, a, body) => {
            let b = infer(&ctx.extended(x.clone(), a.clone()), body)?;
            Some(Formula::implies(a.clone(), b))
        }
        ProofTerm::App(f, arg) => match infer(ctx, f)? {
            Formula::Implies(a, b) if check(ctx, arg, &a) => Some(*b),
            _ => None,
        },
        ProofTerm::TLam(x, body) => {
            if ctx.free_vars().contains(x) {
                return None;
            }
            Some(Formula::forall(x.clone(), infer(ctx, body)?))
        }
        ProofTerm::TApp(f, y) => match infer(ctx, f)? {
            Formula::Forall(x, a) => Some(a.substitute(&x, y)),
            _ => None,
        },
        ProofTerm::Inl(ann, body) => match ann {
            Formula::Or(a, _) if check(ctx, body, a) => Some(ann.clone()),
            _ => None,
        },
        ProofTerm::Inr(ann, body) => match ann {
            Formula::Or(_, b) if check(ctx, body, b) => Some(ann.clone()),
            _ => None,
        },
        ProofTerm::Case {
            scrutinee,
            left,
            right,
        } => {
            let want = Formula::or(left.1.clone(), right.1.clone());
            if !check(ctx, scrutinee, &want) {
                return None;
            }
            let l = infer(&ctx.extended(left.0.clone(), left.1.clone()), &left.2)?;
            let r = infer(&ctx.extended(right.0.clone(), right.1.clone()), &right.2)?;
            l.alpha_eq(&r).then_some(l)
        }
        ProofTerm::Pack(body, y, ann) => match ann {
            Formula::Exists(x, a) if check(ctx, body, &a.substitute(x, y)) => Some(ann.clone()),
            _ => None,
        },
        ProofTerm::Unpack {
            hyp,
            eigen,
            hyp_ty,
            scrutinee,
            body,
        } => {
            let packed = Formula::exists(eigen.clone(), hyp_ty.clone());
            if !check(ctx, scrutinee, &packed) || ctx.free_vars().contains(eigen) {
                return None;
            }
            let sigma = infer(&ctx.extended(hyp.clone(), hyp_ty.clone()), body)?;
            (!sigma.has_free(eigen)).then_some(sigma)
        }
        ProofTerm::Abort(ann, body) => check(ctx, body, &Formula::Falsum).then(|| ann.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn t(s: &str) -> ProofTerm {
        s.parse().unwrap()
    }

    #[test]
    fn variable_rule() {
        let ctx = Context::from_pairs([("x", f("P(a)"))]);
        assert!(check(&ctx, &t("x"), &f("P(a)")));
        assert!(!check(&ctx, &t("x"), &f("P(b)")));
        assert!(!check(&ctx, &t("y"), &f("P(a)")));
    }

    #[test]
    fn bottom_elimination() {
        let ctx = Context::from_pairs([("x", Formula::Falsum)]);
        assert!(check(&ctx, &t("(abort [Q(a)] x)"), &f("Q(a)")));
        assert!(check(
            &Context::new(),
            &t("(lam x [false] (tlam X (abort [P(X)] x)))"),
            &f("false -> forall X. P(X)")
        ));
    }

    #[test]
    fn forall_intro_eigenvariable_condition() {
        let ctx = Context::from_pairs([("x", f("P(X)"))]);
        assert!(!check(&ctx, &t("(tlam X x)"), &f("forall X. P(X)")));
        let ok = t("(tlam X (lam x [P(X) /\\ Q(X)] (fst x)))");
        assert!(check(
            &Context::new(),
            &ok,
            &f("forall X. P(X) /\\ Q(X) -> P(X)")
        ));
    }

    #[test]
    fn exists_elimination_eigenvariable_condition() {
        let ctx = Context::from_pairs([("h", f("exists X. P(X)"))]);
        let good = t("(unpack u Z [P(Z)] h (pack u Z [exists Y. P(Y)]))");
        assert!(check(&ctx, &good, &f("exists Y. P(Y)")));
        // Eigenvariable escaping into the conclusion.
        let bad = t("(unpack u Z [P(Z)] h u)");
        assert!(infer(&ctx, &bad).is_none());
        // Eigenvariable free in the context.
        let ctx2 = Context::from_pairs([("h", f("exists X. P(X)")), ("k", f("Q(Z)"))]);
        assert!(infer(&ctx2, &good).is_none());
    }

    #[test]
    fn case_and_injections() {
        let ctx = Context::from_pairs([("h", f("P \\/ Q"))]);
        let m = t("(case h a [P] (inr [Q \\/ P] a) b [Q] (inl [Q \\/ P] b))");
        assert!(check(&ctx, &m, &f("Q \\/ P")));
        let wrong = t("(case h a [P] (inr [Q \\/ P] a) b [Q] b)");
        assert!(infer(&ctx, &wrong).is_none());
    }

    #[test]
    fn types_compared_up_to_bound_renaming() {
        let ctx = Context::from_pairs([("h", f("forall X. P(X)"))]);
        assert!(check(&ctx, &t("h"), &f("forall Y. P(Y)")));
        assert!(check(&ctx, &t("(tapp h a)"), &f("P(a)")));
    }

    #[test]
    fn application_requires_matching_argument() {
        let ctx = Context::from_pairs([("f", f("P -> Q")), ("p", f("P")), ("q", f("Q"))]);
        assert!(check(&ctx, &t("(app f p)"), &f("Q")));
        assert!(!check(&ctx, &t("(app f q)"), &f("Q")));
    }
}

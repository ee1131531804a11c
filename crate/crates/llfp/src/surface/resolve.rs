//! Resolution from surface expressions to kernel terms.
//!
//! The parser produces one expression language; this pass sorts it into
//! kinds, families and objects and replaces names by their binding form:
//! identifiers bound by an enclosing `Pi`, `\` or `pq` lock become de Bruijn
//! indices, identifiers declared in the ambient context become free
//! variables, and everything else becomes a constant. Whether a constant is
//! actually declared is the checker's business, not the resolver's, so
//! unknown names resolve to constants and fail later with a typing error
//! rather than a parse error.

use std::collections::BTreeSet;

use super::parse::{CtxBlock, SigBlock, SurfExpr, SurfGuard};
use super::SurfaceError;
use crate::syntax::{
    AtomicFamily, AtomicObject, CanonicalObject, Context, Family, Kind, LockGuard, NameHint,
    SigClassifier, Signature, VarName,
};

struct Resolver<'a> {
    /// Binder names in scope, innermost last. Arrow codomains push an empty
    /// slot so indices still count the anonymous binder.
    scope: Vec<String>,
    ctx_vars: &'a BTreeSet<String>,
}

fn sort_of(e: &SurfExpr) -> &'static str {
    match e {
        SurfExpr::Ident(..) => "an identifier",
        SurfExpr::TypeKw(_) => "`Type`",
        SurfExpr::Pi { .. } => "a product",
        SurfExpr::Arrow { .. } => "an arrow",
        SurfExpr::Abs { .. } => "an abstraction",
        SurfExpr::App { .. } => "an application",
        SurfExpr::Lock { .. } => "a lock",
        SurfExpr::Unlock { .. } => "an unlock",
    }
}

impl<'a> Resolver<'a> {
    fn new(ctx_vars: &'a BTreeSet<String>) -> Self {
        Resolver { scope: Vec::new(), ctx_vars }
    }

    fn var(&self, name: &str) -> Option<AtomicObject> {
        if let Some(pos) = self.scope.iter().rposition(|s| s == name) {
            Some(AtomicObject::BVar((self.scope.len() - 1 - pos) as u32))
        } else if self.ctx_vars.contains(name) {
            Some(AtomicObject::FVar(VarName::source(name)))
        } else {
            None
        }
    }

    fn is_var(&self, name: &str) -> bool {
        self.scope.iter().any(|s| s == name) || self.ctx_vars.contains(name)
    }

    fn kind(&mut self, e: &SurfExpr) -> Result<Kind, SurfaceError> {
        match e {
            SurfExpr::TypeKw(_) => Ok(Kind::Type),
            SurfExpr::Pi { binder, dom, body, .. } => {
                let dom = self.family(dom)?;
                self.scope.push(binder.clone());
                let body = self.kind(body);
                self.scope.pop();
                Ok(Kind::Pi(Box::new(dom), NameHint::new(binder), Box::new(body?)))
            }
            SurfExpr::Arrow { dom, cod, .. } => {
                let dom = self.family(dom)?;
                self.scope.push(String::new());
                let cod = self.kind(cod);
                self.scope.pop();
                Ok(Kind::Pi(Box::new(dom), NameHint::anon(), Box::new(cod?)))
            }
            other => Err(SurfaceError::syntax(
                other.span().clone(),
                format!("expected a kind, found {}", sort_of(other)),
            )),
        }
    }

    fn atomic_family(&mut self, e: &SurfExpr) -> Result<AtomicFamily, SurfaceError> {
        match e {
            SurfExpr::Ident(name, span) => {
                if self.is_var(name) {
                    Err(SurfaceError::syntax(
                        span.clone(),
                        format!("variable `{name}` cannot head a family"),
                    ))
                } else {
                    Ok(AtomicFamily::Const(name.as_str().into()))
                }
            }
            SurfExpr::App { head, arg, .. } => {
                let head = self.atomic_family(head)?;
                let arg = self.object(arg)?;
                Ok(AtomicFamily::App(Box::new(head), Box::new(arg)))
            }
            other => Err(SurfaceError::syntax(
                other.span().clone(),
                format!("expected an atomic family, found {}", sort_of(other)),
            )),
        }
    }

    fn family(&mut self, e: &SurfExpr) -> Result<Family, SurfaceError> {
        match e {
            SurfExpr::Ident(..) | SurfExpr::App { .. } => {
                Ok(Family::Atom(self.atomic_family(e)?))
            }
            SurfExpr::Pi { binder, dom, body, .. } => {
                let dom = self.family(dom)?;
                self.scope.push(binder.clone());
                let body = self.family(body);
                self.scope.pop();
                Ok(Family::Pi(Box::new(dom), NameHint::new(binder), Box::new(body?)))
            }
            SurfExpr::Arrow { dom, cod, .. } => {
                let dom = self.family(dom)?;
                self.scope.push(String::new());
                let cod = self.family(cod);
                self.scope.pop();
                Ok(Family::Pi(Box::new(dom), NameHint::anon(), Box::new(cod?)))
            }
            SurfExpr::Lock { pred, guard, guard_ty, body, .. } => {
                let guard_ty = self.family(guard_ty)?;
                let (guard, body) = match guard {
                    SurfGuard::Term(g) => {
                        let g = self.object(g)?;
                        (LockGuard::Term(Box::new(g)), self.family(body)?)
                    }
                    SurfGuard::Binder(b) => {
                        self.scope.push(b.clone());
                        let body = self.family(body);
                        self.scope.pop();
                        (LockGuard::Binder(NameHint::new(b)), body?)
                    }
                };
                Ok(Family::Lock {
                    pred: pred.as_str().into(),
                    guard,
                    guard_ty: Box::new(guard_ty),
                    body: Box::new(body),
                })
            }
            SurfExpr::TypeKw(span) => Err(SurfaceError::syntax(
                span.clone(),
                "`Type` is a kind, not a family".to_string(),
            )),
            other => Err(SurfaceError::syntax(
                other.span().clone(),
                format!("expected a family, found {}", sort_of(other)),
            )),
        }
    }

    fn atomic_object(&mut self, e: &SurfExpr) -> Result<AtomicObject, SurfaceError> {
        match e {
            SurfExpr::Ident(name, _) => Ok(self
                .var(name)
                .unwrap_or_else(|| AtomicObject::Const(name.as_str().into()))),
            SurfExpr::App { head, arg, .. } => {
                let head = self.atomic_object(head)?;
                let arg = self.object(arg)?;
                Ok(AtomicObject::App(Box::new(head), Box::new(arg)))
            }
            SurfExpr::Unlock { pred, witness, witness_ty, body, .. } => {
                let witness = self.object(witness)?;
                let witness_ty = self.family(witness_ty)?;
                let body = self.atomic_object(body)?;
                Ok(AtomicObject::Unlock {
                    pred: pred.as_str().into(),
                    witness: Box::new(witness),
                    witness_ty: Box::new(witness_ty),
                    body: Box::new(body),
                })
            }
            other => Err(SurfaceError::syntax(
                other.span().clone(),
                format!("expected an atomic object, found {}", sort_of(other)),
            )),
        }
    }

    fn object(&mut self, e: &SurfExpr) -> Result<CanonicalObject, SurfaceError> {
        match e {
            SurfExpr::Ident(..) | SurfExpr::App { .. } | SurfExpr::Unlock { .. } => {
                Ok(CanonicalObject::Atom(self.atomic_object(e)?))
            }
            SurfExpr::Abs { binder, dom, body, .. } => {
                let dom = self.family(dom)?;
                self.scope.push(binder.clone());
                let body = self.object(body);
                self.scope.pop();
                Ok(CanonicalObject::Abs(Box::new(dom), NameHint::new(binder), Box::new(body?)))
            }
            SurfExpr::Lock { pred, guard, guard_ty, body, .. } => {
                let guard_ty = self.family(guard_ty)?;
                let (guard, body) = match guard {
                    SurfGuard::Term(g) => {
                        let g = self.object(g)?;
                        (LockGuard::Term(Box::new(g)), self.object(body)?)
                    }
                    SurfGuard::Binder(b) => {
                        self.scope.push(b.clone());
                        let body = self.object(body);
                        self.scope.pop();
                        (LockGuard::Binder(NameHint::new(b)), body?)
                    }
                };
                Ok(CanonicalObject::Lock {
                    pred: pred.as_str().into(),
                    guard,
                    guard_ty: Box::new(guard_ty),
                    body: Box::new(body),
                })
            }
            other => Err(SurfaceError::syntax(
                other.span().clone(),
                format!("expected an object, found {}", sort_of(other)),
            )),
        }
    }
}

/// `Type`-tailed expressions classify families, everything else objects.
fn classifier_is_kind(e: &SurfExpr) -> bool {
    match e {
        SurfExpr::TypeKw(_) => true,
        SurfExpr::Pi { body, .. } => classifier_is_kind(body),
        SurfExpr::Arrow { cod, .. } => classifier_is_kind(cod),
        _ => false,
    }
}

pub fn resolve_classifier(
    e: &SurfExpr,
    ctx_vars: &BTreeSet<String>,
) -> Result<SigClassifier, SurfaceError> {
    let mut r = Resolver::new(ctx_vars);
    if classifier_is_kind(e) {
        Ok(SigClassifier::Fam(r.kind(e)?))
    } else {
        Ok(SigClassifier::Obj(r.family(e)?))
    }
}

pub fn resolve_kind(e: &SurfExpr, ctx_vars: &BTreeSet<String>) -> Result<Kind, SurfaceError> {
    Resolver::new(ctx_vars).kind(e)
}

pub fn resolve_family(e: &SurfExpr, ctx_vars: &BTreeSet<String>) -> Result<Family, SurfaceError> {
    Resolver::new(ctx_vars).family(e)
}

pub fn resolve_object(
    e: &SurfExpr,
    ctx_vars: &BTreeSet<String>,
) -> Result<CanonicalObject, SurfaceError> {
    Resolver::new(ctx_vars).object(e)
}

pub fn resolve_atomic_object(
    e: &SurfExpr,
    ctx_vars: &BTreeSet<String>,
) -> Result<AtomicObject, SurfaceError> {
    Resolver::new(ctx_vars).atomic_object(e)
}

/// Builds a signature from a parsed block. Declarations are kept in order;
/// duplicate names are representable and left for the checker to reject.
pub fn resolve_signature(block: &SigBlock) -> Result<Signature, SurfaceError> {
    let no_vars = BTreeSet::new();
    let mut sig = Signature::new();
    for (name, classifier, _) in &block.decls {
        match resolve_classifier(classifier, &no_vars)? {
            SigClassifier::Fam(k) => sig.push_fam(name, k),
            SigClassifier::Obj(f) => sig.push_obj(name, f),
        }
    }
    Ok(sig)
}

/// Builds a context from a parsed block. Each entry's family may mention the
/// variables declared before it.
pub fn resolve_context(block: &CtxBlock) -> Result<Context, SurfaceError> {
    let mut ctx_vars = BTreeSet::new();
    let mut ctx = Context::new();
    for (name, fam, _) in &block.entries {
        let f = resolve_family(fam, &ctx_vars)?;
        ctx.entries.push((VarName::source(name), f));
        ctx_vars.insert(name.clone());
    }
    Ok(ctx)
}

/// The names a goal subject may use as free variables.
pub fn context_var_names(ctx: &Context) -> BTreeSet<String> {
    ctx.entries.iter().map(|(x, _)| x.text.to_string()).collect()
}

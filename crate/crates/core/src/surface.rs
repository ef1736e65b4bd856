//! Surface syntax of `.nry` files and its printer.

use std::fmt;

use crate::syntax::{Icit, Name, Span};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// A variable, global, builtin, or (when printing) a meta such as `?3`.
    Ident(Name, Span),
    Hole(Span),
    Num(u64, Span),
    App(Box<Expr>, Box<Expr>, Icit),
    Lam(Name, Icit, Box<Expr>),
    /// A binder named `_` prints as an arrow.
    Pi(Name, Icit, Box<Expr>, Box<Expr>),
    Sigma(Name, Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Ann(Box<Expr>, Box<Expr>),
    Let(Name, Option<Box<Expr>>, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SPattern {
    Var(Name, Span),
    Num(u64, Span),
    /// `zero`, `nil`, `suc p`, `cons p q`.
    Ctor(Name, Vec<SPattern>, Span),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Ok,
    Unsolved,
    TypeError,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expect::Ok => "ok",
            Expect::Unsolved => "unsolved",
            Expect::TypeError => "typeerror",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Sig { name: Name, ty: Expr, span: Span },
    Clause { name: Name, pats: Vec<(SPattern, Icit)>, rhs: Expr, span: Span },
    Postulate { name: Name, ty: Expr, span: Span },
    Expect { tag: Expect, span: Span },
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Sig { span, .. } | Decl::Clause { span, .. } | Decl::Postulate { span, .. } | Decl::Expect { span, .. } => *span,
        }
    }

    /// The same declaration with every position reset, for comparisons.
    pub fn erase_spans(&self) -> Decl {
        let z = Span::default();
        match self {
            Decl::Sig { name, ty, .. } => Decl::Sig { name: name.clone(), ty: ty.erase_spans(), span: z },
            Decl::Clause { name, pats, rhs, .. } => Decl::Clause {
                name: name.clone(),
                pats: pats.iter().map(|(p, i)| (p.erase_spans(), *i)).collect(),
                rhs: rhs.erase_spans(),
                span: z,
            },
            Decl::Postulate { name, ty, .. } => Decl::Postulate { name: name.clone(), ty: ty.erase_spans(), span: z },
            Decl::Expect { tag, .. } => Decl::Expect { tag: *tag, span: z },
        }
    }
}

impl SPattern {
    fn erase_spans(&self) -> SPattern {
        let z = Span::default();
        match self {
            SPattern::Var(x, _) => SPattern::Var(x.clone(), z),
            SPattern::Num(n, _) => SPattern::Num(*n, z),
            SPattern::Ctor(c, ps, _) => SPattern::Ctor(c.clone(), ps.iter().map(SPattern::erase_spans).collect(), z),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            SPattern::Var(_, s) | SPattern::Num(_, s) | SPattern::Ctor(_, _, s) => *s,
        }
    }
}

impl Expr {
    pub fn ident(x: &str) -> Expr {
        Expr::Ident(x.into(), Span::default())
    }

    pub fn app(f: Expr, a: Expr, i: Icit) -> Expr {
        Expr::App(Box::new(f), Box::new(a), i)
    }

    /// Position of the leftmost token.
    pub fn span(&self) -> Span {
        match self {
            Expr::Ident(_, s) | Expr::Hole(s) | Expr::Num(_, s) => *s,
            Expr::App(f, _, _) => f.span(),
            Expr::Lam(_, _, b) => b.span(),
            Expr::Pi(_, _, a, _) | Expr::Sigma(_, a, _) | Expr::Pair(a, _) | Expr::Ann(a, _) => a.span(),
            Expr::Let(_, _, d, _) => d.span(),
        }
    }

    pub fn erase_spans(&self) -> Expr {
        let z = Span::default();
        let b = |e: &Expr| Box::new(e.erase_spans());
        match self {
            Expr::Ident(x, _) => Expr::Ident(x.clone(), z),
            Expr::Hole(_) => Expr::Hole(z),
            Expr::Num(n, _) => Expr::Num(*n, z),
            Expr::App(f, a, i) => Expr::App(b(f), b(a), *i),
            Expr::Lam(x, i, e) => Expr::Lam(x.clone(), *i, b(e)),
            Expr::Pi(x, i, a, c) => Expr::Pi(x.clone(), *i, b(a), b(c)),
            Expr::Sigma(x, a, c) => Expr::Sigma(x.clone(), b(a), b(c)),
            Expr::Pair(x, y) => Expr::Pair(b(x), b(y)),
            Expr::Ann(x, y) => Expr::Ann(b(x), b(y)),
            Expr::Let(x, t, d, e) => Expr::Let(x.clone(), t.as_ref().map(|t| b(t)), b(d), b(e)),
        }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Expr, Vec<(&Expr, Icit)>) {
        let mut args = Vec::new();
        let mut e = self;
        while let Expr::App(f, a, i) = e {
            args.push((&**a, *i));
            e = f;
        }
        args.reverse();
        (e, args)
    }
}

// Precedence levels: 0 binders and arrows, 1 products, 2 application, 3 atoms.
fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, prec: u8) -> fmt::Result {
    let paren = |f: &mut fmt::Formatter<'_>, need: bool, body: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result| {
        if need {
            f.write_str("(")?;
            body(f)?;
            f.write_str(")")
        } else {
            body(f)
        }
    };
    match e {
        Expr::Ident(x, _) => f.write_str(x),
        Expr::Hole(_) => f.write_str("_"),
        Expr::Num(n, _) => write!(f, "{n}"),
        Expr::App(..) => paren(f, prec > 2, &|f| {
            let (head, args) = e.spine();
            write_expr(f, head, 3)?;
            for (a, i) in &args {
                match i {
                    Icit::Expl => {
                        f.write_str(" ")?;
                        write_expr(f, a, 3)?;
                    }
                    Icit::Impl => {
                        f.write_str(" {")?;
                        write_expr(f, a, 0)?;
                        f.write_str("}")?;
                    }
                }
            }
            Ok(())
        }),
        Expr::Lam(..) => paren(f, prec > 0, &|f| {
            f.write_str("\\")?;
            let mut e = e;
            let mut first = true;
            while let Expr::Lam(x, i, b) = e {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                match i {
                    Icit::Expl => f.write_str(x)?,
                    Icit::Impl => write!(f, "{{{x}}}")?,
                }
                e = b;
            }
            f.write_str(". ")?;
            write_expr(f, e, 0)
        }),
        Expr::Pi(x, i, a, b) => paren(f, prec > 0, &|f| {
            match (i, &**x) {
                (Icit::Expl, "_") => write_expr(f, a, 1)?,
                (Icit::Expl, _) => {
                    write!(f, "({x} : ")?;
                    write_expr(f, a, 0)?;
                    f.write_str(")")?;
                }
                (Icit::Impl, _) => {
                    write!(f, "{{{x} : ")?;
                    write_expr(f, a, 0)?;
                    f.write_str("}")?;
                }
            }
            f.write_str(" -> ")?;
            write_expr(f, b, 0)
        }),
        Expr::Sigma(x, a, b) => paren(f, prec > 1, &|f| {
            if &**x == "_" {
                write_expr(f, a, 2)?;
            } else {
                write!(f, "({x} : ")?;
                write_expr(f, a, 0)?;
                f.write_str(")")?;
            }
            f.write_str(" * ")?;
            write_expr(f, b, 1)
        }),
        Expr::Pair(..) => {
            f.write_str("(")?;
            let mut e = e;
            let mut first = true;
            while let Expr::Pair(a, b) = e {
                if !first {
                    f.write_str(" , ")?;
                }
                first = false;
                write_expr(f, a, 0)?;
                e = b;
            }
            f.write_str(" , ")?;
            write_expr(f, e, 0)?;
            f.write_str(")")
        }
        Expr::Ann(a, t) => {
            f.write_str("(")?;
            write_expr(f, a, 0)?;
            f.write_str(" : ")?;
            write_expr(f, t, 0)?;
            f.write_str(")")
        }
        Expr::Let(x, t, d, b) => paren(f, prec > 0, &|f| {
            write!(f, "let {x}")?;
            if let Some(t) = t {
                f.write_str(" : ")?;
                write_expr(f, t, 0)?;
            }
            f.write_str(" = ")?;
            write_expr(f, d, 0)?;
            f.write_str(" in ")?;
            write_expr(f, b, 0)
        }),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

impl fmt::Display for SPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SPattern::Var(x, _) => f.write_str(x),
            SPattern::Num(n, _) => write!(f, "{n}"),
            SPattern::Ctor(c, ps, _) if ps.is_empty() => f.write_str(c),
            SPattern::Ctor(c, ps, _) => {
                write!(f, "({c}")?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Sig { name, ty, .. } => write!(f, "{name} : {ty}"),
            Decl::Postulate { name, ty, .. } => write!(f, "postulate {name} : {ty}"),
            Decl::Expect { tag, .. } => write!(f, "#expect {tag}"),
            Decl::Clause { name, pats, rhs, .. } => {
                f.write_str(name)?;
                for (p, i) in pats {
                    match i {
                        Icit::Expl => write!(f, " {p}")?,
                        Icit::Impl => write!(f, " {{{p}}}")?,
                    }
                }
                write!(f, " = {rhs}")
            }
        }
    }
}

/// Prints a whole file, one declaration per line.
pub fn print_decls(decls: &[Decl]) -> String {
    decls.iter().map(|d| format!("{d}\n")).collect()
}

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};

use super::{FrontendError, ProgramBuilder, StencilProgram};

/// Exact scalar used for folded constants.
pub type Scalar = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn fold(self, a: &Scalar, b: &Scalar) -> Result<Scalar, FrontendError> {
        Ok(match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b.is_zero() {
                    return Err(FrontendError::DivisionByZeroConstant);
                }
                a / b
            }
        })
    }
}

/// Neighbour access along one grid axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shift {
    Im,
    Ip,
    Jm,
    Jp,
    Km,
    Kp,
}

impl Shift {
    pub const ALL: [Shift; 6] = [Shift::Im, Shift::Ip, Shift::Jm, Shift::Jp, Shift::Km, Shift::Kp];

    pub fn name(self) -> &'static str {
        match self {
            Shift::Im => "im",
            Shift::Ip => "ip",
            Shift::Jm => "jm",
            Shift::Jp => "jp",
            Shift::Km => "km",
            Shift::Kp => "kp",
        }
    }

    pub fn from_name(s: &str) -> Option<Shift> {
        Shift::ALL.into_iter().find(|d| d.name() == s)
    }

    /// Index expression of the neighbour read, e.g. `i-1` for [`Shift::Im`].
    pub fn offset(self) -> &'static str {
        match self {
            Shift::Im => "i-1",
            Shift::Ip => "i+1",
            Shift::Jm => "j-1",
            Shift::Jp => "j+1",
            Shift::Km => "k-1",
            Shift::Kp => "k+1",
        }
    }

    pub fn from_offset(s: &str) -> Option<Shift> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Shift::ALL.into_iter().find(|d| d.offset() == compact)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExprId(u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One node of the expression forest. Children are embedded, so arity is
/// fixed by the variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StencilExpr {
    /// The `n`-th declared input.
    Input(u32),
    Const(Scalar),
    Neg(ExprId),
    Binary(BinOp, ExprId, ExprId),
    Shift(Shift, ExprId),
}

impl StencilExpr {
    pub fn children(&self) -> Vec<ExprId> {
        match *self {
            StencilExpr::Input(_) | StencilExpr::Const(_) => vec![],
            StencilExpr::Neg(a) | StencilExpr::Shift(_, a) => vec![a],
            StencilExpr::Binary(_, a, b) => vec![a, b],
        }
    }
}

/// Hash-consed expression storage. Nodes are appended in creation order, so
/// children always precede their parents.
#[derive(Clone, Debug, Default)]
pub struct ExprArena {
    nodes: Vec<StencilExpr>,
    index: HashMap<StencilExpr, ExprId>,
}

impl ExprArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[StencilExpr] {
        &self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = (ExprId, &StencilExpr)> {
        self.nodes.iter().enumerate().map(|(i, n)| (ExprId(i as u32), n))
    }

    pub fn get(&self, id: ExprId) -> &StencilExpr {
        &self.nodes[id.index()]
    }

    pub fn as_const(&self, id: ExprId) -> Option<&Scalar> {
        match self.get(id) {
            StencilExpr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_const(&self, id: ExprId) -> bool {
        self.as_const(id).is_some()
    }

    fn intern(&mut self, node: StencilExpr) -> ExprId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = ExprId(u32::try_from(self.nodes.len()).expect("arena fits u32"));
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn input(&mut self, slot: u32) -> ExprId {
        self.intern(StencilExpr::Input(slot))
    }

    pub fn constant(&mut self, value: Scalar) -> ExprId {
        self.intern(StencilExpr::Const(value))
    }

    pub fn neg(&mut self, a: ExprId) -> ExprId {
        match self.as_const(a) {
            Some(c) => {
                let v = -c.clone();
                self.constant(v)
            }
            None => self.intern(StencilExpr::Neg(a)),
        }
    }

    pub fn binary(&mut self, op: BinOp, a: ExprId, b: ExprId) -> Result<ExprId, FrontendError> {
        match (self.as_const(a), self.as_const(b)) {
            (Some(x), Some(y)) => {
                let v = op.fold(x, y)?;
                Ok(self.constant(v))
            }
            (_, Some(y)) if op == BinOp::Div && y.is_zero() => Err(FrontendError::DivisionByZeroConstant),
            _ => Ok(self.intern(StencilExpr::Binary(op, a, b))),
        }
    }

    /// A shifted constant is the same constant.
    pub fn shift(&mut self, dir: Shift, a: ExprId) -> ExprId {
        if self.is_const(a) {
            return a;
        }
        self.intern(StencilExpr::Shift(dir, a))
    }

    /// Marks every node reachable from `roots`.
    pub fn reachable(&self, roots: impl IntoIterator<Item = ExprId>) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<ExprId> = roots.into_iter().collect();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            stack.extend(self.nodes[id.index()].children());
        }
        seen
    }
}

/// Operator-overloading front door: write the update formula as ordinary
/// Rust arithmetic on [`Sym`] handles and the tracer records it.
#[derive(Default)]
pub struct Tracer {
    builder: RefCell<ProgramBuilder>,
}

#[derive(Clone, Copy)]
pub struct Sym<'t> {
    tracer: &'t Tracer,
    id: ExprId,
}

impl fmt::Debug for Sym<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym({:?})", self.id)
    }
}

impl Tracer {
    pub fn new() -> Self {
        Self::default()
    }

    fn sym(&self, id: ExprId) -> Sym<'_> {
        Sym { tracer: self, id }
    }

    /// # Panics
    /// On a repeated name.
    pub fn input(&self, name: &str, weight: u32) -> Sym<'_> {
        let id = self.builder.borrow_mut().input(name, weight).expect("fresh input name");
        self.sym(id)
    }

    pub fn constant(&self, value: Scalar) -> Sym<'_> {
        let id = self.builder.borrow_mut().arena.constant(value);
        self.sym(id)
    }

    /// `numer / denom` as a constant.
    pub fn ratio(&self, numer: i64, denom: i64) -> Sym<'_> {
        self.constant(Scalar::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn int(&self, v: i64) -> Sym<'_> {
        self.ratio(v, 1)
    }

    pub fn shift(&self, dir: Shift, a: Sym<'_>) -> Sym<'_> {
        let id = self.builder.borrow_mut().arena.shift(dir, a.id);
        self.sym(id)
    }

    pub fn output(&self, name: &str, value: Sym<'_>) {
        self.builder.borrow_mut().output(name, value.id).expect("fresh output name");
    }

    pub fn finish(self) -> Result<StencilProgram, FrontendError> {
        self.builder.into_inner().finish()
    }

    fn binary(&self, op: BinOp, a: ExprId, b: ExprId) -> Sym<'_> {
        let id = self.builder.borrow_mut().arena.binary(op, a, b).expect("traced division by constant zero");
        self.sym(id)
    }
}

impl<'t> Sym<'t> {
    pub fn id(self) -> ExprId {
        self.id
    }

    pub fn im(self) -> Sym<'t> {
        self.tracer.shift(Shift::Im, self)
    }
    pub fn ip(self) -> Sym<'t> {
        self.tracer.shift(Shift::Ip, self)
    }
    pub fn jm(self) -> Sym<'t> {
        self.tracer.shift(Shift::Jm, self)
    }
    pub fn jp(self) -> Sym<'t> {
        self.tracer.shift(Shift::Jp, self)
    }
    pub fn km(self) -> Sym<'t> {
        self.tracer.shift(Shift::Km, self)
    }
    pub fn kp(self) -> Sym<'t> {
        self.tracer.shift(Shift::Kp, self)
    }
}

macro_rules! sym_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl<'t> $tr for Sym<'t> {
            type Output = Sym<'t>;
            fn $method(self, rhs: Sym<'t>) -> Sym<'t> {
                self.tracer.binary($op, self.id, rhs.id)
            }
        }
    };
}

sym_binop!(Add, add, BinOp::Add);
sym_binop!(Sub, sub, BinOp::Sub);
sym_binop!(Mul, mul, BinOp::Mul);
sym_binop!(Div, div, BinOp::Div);

impl<'t> Neg for Sym<'t> {
    type Output = Sym<'t>;
    fn neg(self) -> Sym<'t> {
        let id = self.tracer.builder.borrow_mut().arena.neg(self.id);
        self.tracer.sym(id)
    }
}

/// Renders a rational exactly: a decimal when the expansion terminates,
/// `p/q` otherwise.
pub fn format_scalar(v: &Scalar) -> String {
    if v.is_integer() {
        return v.numer().to_string();
    }
    let mut den = v.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", v.numer(), v.denom());
    }
    let digits = twos.max(fives);
    let scaled = (v * Scalar::from_integer(BigInt::from(10).pow(digits))).to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if s.len() <= digits as usize {
        s = "0".repeat(digits as usize + 1 - s.len()) + &s;
    }
    let point = s.len() - digits as usize;
    let out = format!("{}.{}", &s[..point], &s[point..]);
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

/// Parses `12`, `0.005`, `1.5e-3`, or `p/q` into an exact rational.
pub fn parse_scalar(text: &str) -> Option<Scalar> {
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Scalar::new(p, q));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - i32::try_from(frac_part.len()).ok()?;
    let ten = BigInt::from(10);
    let mut v = Scalar::from_integer(digits);
    if scale >= 0 {
        v *= Scalar::from_integer(ten.pow(scale as u32));
    } else {
        v /= Scalar::from_integer(ten.pow(scale.unsigned_abs()));
    }
    Some(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn hash_consing_shares_equal_subtrees() {
        let mut a = ExprArena::new();
        let u = a.input(0);
        let s1 = a.shift(Shift::Im, u);
        let s2 = a.shift(Shift::Im, u);
        assert_eq!(s1, s2);
        let two = a.constant(q(2, 1));
        let x = a.binary(BinOp::Mul, two, u).unwrap();
        let y = a.binary(BinOp::Mul, two, u).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn constants_fold() {
        let mut a = ExprArena::new();
        let c1 = a.constant(q(1, 10));
        let c2 = a.constant(q(1, 10));
        let prod = a.binary(BinOp::Div, c1, c2).unwrap();
        assert_eq!(a.as_const(prod), Some(&q(1, 1)));
        let n = a.neg(prod);
        assert_eq!(a.as_const(n), Some(&q(-1, 1)));
        let sh = a.shift(Shift::Kp, n);
        assert_eq!(sh, n);
        let zero = a.constant(q(0, 1));
        assert_eq!(a.binary(BinOp::Div, c1, zero), Err(FrontendError::DivisionByZeroConstant));
        let u = a.input(0);
        assert_eq!(a.binary(BinOp::Div, u, zero), Err(FrontendError::DivisionByZeroConstant));
    }

    #[test]
    fn scalar_formatting() {
        assert_eq!(format_scalar(&q(1, 200)), "0.005");
        assert_eq!(format_scalar(&q(-3, 4)), "-0.75");
        assert_eq!(format_scalar(&q(1, 6)), "1/6");
        assert_eq!(format_scalar(&q(7, 1)), "7");
        assert_eq!(format_scalar(&q(1, 20)), "0.05");
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!(parse_scalar("0.005"), Some(q(1, 200)));
        assert_eq!(parse_scalar("1.5e-3"), Some(q(3, 2000)));
        assert_eq!(parse_scalar("2E2"), Some(q(200, 1)));
        assert_eq!(parse_scalar(".5"), Some(q(1, 2)));
        assert_eq!(parse_scalar("-1/6"), Some(q(-1, 6)));
        assert_eq!(parse_scalar("1/0"), None);
        assert_eq!(parse_scalar("."), None);
        assert_eq!(parse_scalar("abc"), None);
    }

    #[test]
    fn shift_names_and_offsets_round_trip() {
        for d in Shift::ALL {
            assert_eq!(Shift::from_name(d.name()), Some(d));
            assert_eq!(Shift::from_offset(d.offset()), Some(d));
        }
        assert_eq!(Shift::from_offset("i - 1"), Some(Shift::Im));
    }
}

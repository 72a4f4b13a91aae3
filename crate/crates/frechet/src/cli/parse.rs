//! Lexer, surface syntax, and recursive-descent parser for the DSL.
//!
//! Parsing stops at a *surface* term: shapes that the written syntax
//! leaves open (the family of a bare `proj 1`, the spaces of `id` or a
//! unitary) are filled in by the elaborator, either from an `@`-ascription,
//! from the shape of the value a command applies the term to, or from
//! scalar defaults.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    /// `*.` — the scaling-map marker.
    ScaleOp,
    At,
    Arrow,
    /// `(x)` — the tensor-product marker.
    TensorOp,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let (mut line, mut col) = (1, 1);
    let err = |line, col, what: &str| Error::Parse {
        line,
        col,
        expected: what.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |tok: Tok| Spanned {
            tok,
            line: l0,
            col: c0,
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '(' => {
                // "(x)" is one token
                if i + 2 < chars.len() && chars[i + 1] == 'x' && chars[i + 2] == ')' {
                    out.push(push(Tok::TensorOp));
                    i += 3;
                    col += 3;
                } else {
                    out.push(push(Tok::LParen));
                    i += 1;
                    col += 1;
                }
            }
            ')' => {
                out.push(push(Tok::RParen));
                i += 1;
                col += 1;
            }
            '{' => {
                out.push(push(Tok::LBrace));
                i += 1;
                col += 1;
            }
            '}' => {
                out.push(push(Tok::RBrace));
                i += 1;
                col += 1;
            }
            '[' => {
                out.push(push(Tok::LBracket));
                i += 1;
                col += 1;
            }
            ']' => {
                out.push(push(Tok::RBracket));
                i += 1;
                col += 1;
            }
            ',' => {
                out.push(push(Tok::Comma));
                i += 1;
                col += 1;
            }
            '+' => {
                out.push(push(Tok::Plus));
                i += 1;
                col += 1;
            }
            '@' => {
                out.push(push(Tok::At));
                i += 1;
                col += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(push(Tok::Arrow));
                    i += 2;
                    col += 2;
                } else {
                    out.push(push(Tok::Minus));
                    i += 1;
                    col += 1;
                }
            }
            '*' => {
                if chars.get(i + 1) == Some(&'.') {
                    out.push(push(Tok::ScaleOp));
                    i += 2;
                    col += 2;
                } else {
                    out.push(push(Tok::Star));
                    i += 1;
                    col += 1;
                }
            }
            '.' => {
                if chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
                    let (n, used) = lex_number(&chars[i..])
                        .ok_or_else(|| err(line, col, "a number"))?;
                    out.push(push(Tok::Num(n)));
                    i += used;
                    col += used;
                } else {
                    out.push(push(Tok::Dot));
                    i += 1;
                    col += 1;
                }
            }
            c if c.is_ascii_digit() => {
                let (n, used) =
                    lex_number(&chars[i..]).ok_or_else(|| err(line, col, "a number"))?;
                out.push(push(Tok::Num(n)));
                i += used;
                col += used;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                col += j - i;
                i = j;
                out.push(push(Tok::Ident(word)));
            }
            other => {
                return Err(err(line, col, &format!("a token (found {other:?})")));
            }
        }
    }
    Ok(out)
}

fn lex_number(chars: &[char]) -> Option<(f64, usize)> {
    let mut j = 0;
    while j < chars.len() && chars[j].is_ascii_digit() {
        j += 1;
    }
    if j < chars.len() && chars[j] == '.' && chars.get(j + 1).is_some_and(|c| c.is_ascii_digit()) {
        j += 1;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
    } else if j < chars.len() && chars[j] == '.' && !chars.get(j + 1).is_some_and(|c| *c == '.') {
        // trailing dot only when not part of an operator; leave it
    }
    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
        let mut k = j + 1;
        if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
            k += 1;
        }
        if k < chars.len() && chars[k].is_ascii_digit() {
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            j = k;
        }
    }
    let text: String = chars[..j].iter().collect();
    text.parse().ok().map(|n| (n, j))
}

// --- surface syntax ------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum SIndex {
    Seg(usize),
    Prod(Box<SIndex>, Box<SIndex>),
    Sum(Box<SIndex>, Box<SIndex>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SSpace {
    Scalar,
    Zero,
    Tuple(Vec<SSpace>),
    Pow(SIndex, Box<SSpace>),
    Tensor(Box<SSpace>, Box<SSpace>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SIdxVal {
    Num(usize),
    Pair(Box<SIdxVal>, Box<SIdxVal>),
    Inl(Box<SIdxVal>),
    Inr(Box<SIdxVal>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SVec {
    Num(f64),
    Tuple(Vec<SVec>),
    MapLit(Vec<SVec>),
    Tensor(Vec<(f64, SVec, SVec)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SLin {
    Id,
    Zero,
    Scale(f64),
    Proj(usize),
    Inj(usize),
    Comp(Box<SLin>, Box<SLin>),
    Plus(Box<SLin>, Box<SLin>),
    Minus(Box<SLin>, Box<SLin>),
    Par(Vec<SLin>),
    PowMap(SIndex, Box<SLin>),
    Fanout(Vec<SLin>),
    Red(Vec<(SIdxVal, SIdxVal)>),
    ContractL(SVec),
    ContractR(SVec),
    Unitary(&'static str),
    Dup,
    Sum(usize),
    Rep(usize),
    Scan(usize),
    Ascribe(Box<SLin>, SSpace, Option<SSpace>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SFun {
    Prim(&'static str, i32),
    Const(SVec),
    LinTerm(SLin),
    Bilin(&'static str),
    Comp(Box<SFun>, Box<SFun>),
    Add(Box<SFun>, Box<SFun>),
    Sub(Box<SFun>, Box<SFun>),
    Mul(Box<SFun>, Box<SFun>),
    Par(Vec<SFun>),
    PowFun(SIndex, Box<SFun>),
    Ascribe(Box<SFun>, SSpace, Option<SSpace>),
}

const UNITARIES: &[&str] = &[
    "bra", "ibra", "ket", "iket", "ttranspose", "assoc", "assoc_inv", "distrib", "distrib_inv",
    "zip", "unzip",
];
const PRIMS: &[&str] = &["sin", "cos", "exp", "ln", "tanh"];
const BILINS: &[&str] = &["mul", "dot", "matvec", "tensor", "hadamard", "contract"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> Error {
        let (line, col) = self
            .toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1));
        Error::Parse {
            line,
            col,
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == word)
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn nat(&mut self, what: &str) -> Result<usize> {
        match self.peek() {
            Some(Tok::Num(n)) if n.fract() == 0.0 && *n >= 0.0 => {
                let v = *n as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err(what)),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let neg = self.eat(&Tok::Minus);
        match self.next() {
            Some(Tok::Num(n)) => Ok(if neg { -n } else { n }),
            _ => Err(self.err(what)),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    // --- index sets ---

    fn index(&mut self) -> Result<SIndex> {
        let mut left = self.index_term()?;
        while self.eat(&Tok::Plus) {
            let right = self.index_term()?;
            left = SIndex::Sum(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn index_term(&mut self) -> Result<SIndex> {
        let mut left = self.index_atom()?;
        while self.eat(&Tok::Star) {
            let right = self.index_atom()?;
            left = SIndex::Prod(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn index_atom(&mut self) -> Result<SIndex> {
        if self.eat(&Tok::LParen) {
            let x = self.index()?;
            self.expect(Tok::RParen, "`)` closing an index set")?;
            Ok(x)
        } else {
            Ok(SIndex::Seg(self.nat("an index-set cardinality")?))
        }
    }

    // --- spaces ---

    fn space(&mut self) -> Result<SSpace> {
        let mut left = self.space_atom()?;
        while self.eat(&Tok::TensorOp) {
            let right = self.space_atom()?;
            left = SSpace::Tensor(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn space_atom(&mut self) -> Result<SSpace> {
        match self.peek() {
            Some(Tok::Ident(w)) if w == "R" => {
                self.pos += 1;
                Ok(SSpace::Scalar)
            }
            Some(Tok::Num(n)) if *n == 0.0 => {
                self.pos += 1;
                Ok(SSpace::Zero)
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let x = self.index()?;
                self.expect(Tok::RBracket, "`]` closing a copower index")?;
                let body = self.space_atom()?;
                Ok(SSpace::Pow(x, Box::new(body)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                if self.eat(&Tok::RParen) {
                    return Ok(SSpace::Tuple(Vec::new()));
                }
                let first = self.space()?;
                if self.eat(&Tok::RParen) {
                    return Ok(first); // plain parentheses
                }
                let mut items = vec![first];
                while self.eat(&Tok::Comma) {
                    if self.peek() == Some(&Tok::RParen) {
                        break; // trailing comma: 1-tuples are written (V,)
                    }
                    items.push(self.space()?);
                }
                self.expect(Tok::RParen, "`)` closing a tuple space")?;
                Ok(SSpace::Tuple(items))
            }
            _ => Err(self.err("a space (R, 0, tuple, [X]V or tensor)")),
        }
    }

    // --- vectors ---

    fn vector(&mut self) -> Result<SVec> {
        match self.peek() {
            Some(Tok::Num(_)) | Some(Tok::Minus) => Ok(SVec::Num(self.number("a scalar")?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                if self.eat(&Tok::RParen) {
                    return Ok(SVec::Tuple(Vec::new()));
                }
                let first = self.vector()?;
                if self.eat(&Tok::RParen) {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat(&Tok::Comma) {
                    if self.peek() == Some(&Tok::RParen) {
                        break;
                    }
                    items.push(self.vector()?);
                }
                self.expect(Tok::RParen, "`)` closing a tuple")?;
                Ok(SVec::Tuple(items))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    items.push(self.vector()?);
                    while self.eat(&Tok::Comma) {
                        items.push(self.vector()?);
                    }
                    self.expect(Tok::RBracket, "`]` closing a copower literal")?;
                }
                if items.is_empty() {
                    return Err(self.err("a non-empty copower literal"));
                }
                Ok(SVec::MapLit(items))
            }
            Some(Tok::Ident(w)) if w == "tensor" => {
                self.pos += 1;
                self.expect(Tok::LBrace, "`{` opening a tensor literal")?;
                let mut terms = Vec::new();
                loop {
                    let coeff = self.number("a term coefficient")?;
                    self.expect(Tok::Star, "`*` after the coefficient")?;
                    let left = self.vector()?;
                    self.expect(Tok::TensorOp, "`(x)` between tensor factors")?;
                    let right = self.vector()?;
                    terms.push((coeff, left, right));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace, "`}` closing a tensor literal")?;
                Ok(SVec::Tensor(terms))
            }
            _ => Err(self.err("a vector literal")),
        }
    }

    // --- linear terms ---

    fn lin(&mut self) -> Result<SLin> {
        let mut left = self.lin_comp()?;
        loop {
            if self.eat(&Tok::Plus) {
                let right = self.lin_comp()?;
                left = SLin::Plus(Box::new(left), Box::new(right));
            } else if self.eat(&Tok::Minus) {
                let right = self.lin_comp()?;
                left = SLin::Minus(Box::new(left), Box::new(right));
            } else {
                return Ok(left);
            }
        }
    }

    fn lin_comp(&mut self) -> Result<SLin> {
        let first = self.lin_post()?;
        if self.eat(&Tok::Dot) {
            let rest = self.lin_comp()?;
            Ok(SLin::Comp(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn ascription(&mut self) -> Result<Option<(SSpace, Option<SSpace>)>> {
        if !self.eat(&Tok::At) {
            return Ok(None);
        }
        let dom = self.space()?;
        let cod = if self.eat(&Tok::Arrow) {
            Some(self.space()?)
        } else {
            None
        };
        Ok(Some((dom, cod)))
    }

    fn lin_post(&mut self) -> Result<SLin> {
        let atom = self.lin_atom()?;
        match self.ascription()? {
            Some((dom, cod)) => Ok(SLin::Ascribe(Box::new(atom), dom, cod)),
            None => Ok(atom),
        }
    }

    fn lin_atom(&mut self) -> Result<SLin> {
        // `k *.` — a scaling map
        if let Some(Tok::Num(_)) = self.peek() {
            if self.peek2() == Some(&Tok::ScaleOp) {
                let k = self.number("a scale factor")?;
                self.expect(Tok::ScaleOp, "`*.`")?;
                return Ok(SLin::Scale(k));
            }
        }
        if self.eat(&Tok::Minus) {
            let k = match self.next() {
                Some(Tok::Num(n)) => -n,
                _ => return Err(self.err("a number after `-`")),
            };
            self.expect(Tok::ScaleOp, "`*.` after a scale factor")?;
            return Ok(SLin::Scale(k));
        }
        if self.eat(&Tok::LParen) {
            let t = self.lin()?;
            self.expect(Tok::RParen, "`)` closing a grouped term")?;
            return Ok(t);
        }
        let word = match self.peek() {
            Some(Tok::Ident(w)) => w.clone(),
            _ => return Err(self.err("a linear-term atom")),
        };
        if let Some(u) = UNITARIES.iter().find(|u| **u == word) {
            self.pos += 1;
            return Ok(SLin::Unitary(u));
        }
        match word.as_str() {
            "id" => {
                self.pos += 1;
                Ok(SLin::Id)
            }
            "zero" => {
                self.pos += 1;
                Ok(SLin::Zero)
            }
            "proj" => {
                self.pos += 1;
                Ok(SLin::Proj(self.nat("a 1-based component index")?))
            }
            "inj" => {
                self.pos += 1;
                Ok(SLin::Inj(self.nat("a 1-based component index")?))
            }
            "par" => {
                self.pos += 1;
                Ok(SLin::Par(self.paren_list(Parser::lin)?))
            }
            "fanout" => {
                self.pos += 1;
                Ok(SLin::Fanout(self.paren_list(Parser::lin)?))
            }
            "pow" => {
                self.pos += 1;
                let x = self.index()?;
                let body = self.lin_post()?;
                Ok(SLin::PowMap(x, Box::new(body)))
            }
            "red" => {
                self.pos += 1;
                self.expect(Tok::LBrace, "`{` opening a relation")?;
                let mut pairs = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        self.expect(Tok::LParen, "`(` opening a relation pair")?;
                        let a = self.idx_val()?;
                        self.expect(Tok::Comma, "`,` between pair elements")?;
                        let b = self.idx_val()?;
                        self.expect(Tok::RParen, "`)` closing a relation pair")?;
                        pairs.push((a, b));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrace, "`}` closing a relation")?;
                }
                Ok(SLin::Red(pairs))
            }
            "contractL" => {
                self.pos += 1;
                Ok(SLin::ContractL(self.vector()?))
            }
            "contractR" => {
                self.pos += 1;
                Ok(SLin::ContractR(self.vector()?))
            }
            "dup" => {
                self.pos += 1;
                Ok(SLin::Dup)
            }
            "sum" => {
                self.pos += 1;
                Ok(SLin::Sum(self.nat("the summed cardinality")?))
            }
            "rep" => {
                self.pos += 1;
                Ok(SLin::Rep(self.nat("the replication cardinality")?))
            }
            "scan" => {
                self.pos += 1;
                Ok(SLin::Scan(self.nat("the scan length")?))
            }
            other => Err(self.err(&format!("a linear-term atom (found `{other}`)"))),
        }
    }

    fn idx_val(&mut self) -> Result<SIdxVal> {
        if self.eat_ident("inl") {
            return Ok(SIdxVal::Inl(Box::new(self.idx_val()?)));
        }
        if self.eat_ident("inr") {
            return Ok(SIdxVal::Inr(Box::new(self.idx_val()?)));
        }
        if self.eat(&Tok::LParen) {
            let a = self.idx_val()?;
            self.expect(Tok::Comma, "`,` inside an index pair")?;
            let b = self.idx_val()?;
            self.expect(Tok::RParen, "`)` closing an index pair")?;
            return Ok(SIdxVal::Pair(Box::new(a), Box::new(b)));
        }
        Ok(SIdxVal::Num(self.nat("an index value")?))
    }

    fn paren_list<T>(&mut self, item: fn(&mut Parser) -> Result<T>) -> Result<Vec<T>> {
        self.expect(Tok::LParen, "`(` opening a list")?;
        let mut items = vec![item(self)?];
        while self.eat(&Tok::Comma) {
            items.push(item(self)?);
        }
        self.expect(Tok::RParen, "`)` closing a list")?;
        Ok(items)
    }

    // --- function terms ---

    fn fun(&mut self) -> Result<SFun> {
        let mut left = self.fun_prod()?;
        loop {
            if self.eat(&Tok::Plus) {
                let right = self.fun_prod()?;
                left = SFun::Add(Box::new(left), Box::new(right));
            } else if self.eat(&Tok::Minus) {
                let right = self.fun_prod()?;
                left = SFun::Sub(Box::new(left), Box::new(right));
            } else {
                return Ok(left);
            }
        }
    }

    fn fun_prod(&mut self) -> Result<SFun> {
        let mut left = self.fun_comp()?;
        while self.eat(&Tok::Star) {
            let right = self.fun_comp()?;
            left = SFun::Mul(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn fun_comp(&mut self) -> Result<SFun> {
        let first = self.fun_post()?;
        if self.eat(&Tok::Dot) {
            let rest = self.fun_comp()?;
            Ok(SFun::Comp(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn fun_post(&mut self) -> Result<SFun> {
        let atom = self.fun_atom()?;
        match self.ascription()? {
            Some((dom, cod)) => Ok(SFun::Ascribe(Box::new(atom), dom, cod)),
            None => Ok(atom),
        }
    }

    fn starts_fun_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(_)) | Some(Tok::LParen) => true,
            Some(Tok::Num(_)) => self.peek2() == Some(&Tok::ScaleOp),
            _ => false,
        }
    }

    fn fun_atom(&mut self) -> Result<SFun> {
        if self.eat(&Tok::LParen) {
            let t = self.fun()?;
            self.expect(Tok::RParen, "`)` closing a grouped term")?;
            return Ok(t);
        }
        let word = match self.peek() {
            Some(Tok::Ident(w)) => w.clone(),
            // fall back to linear atoms (e.g. `2 *.`)
            _ => return Ok(SFun::LinTerm(self.lin_atom()?)),
        };
        if let Some(p) = PRIMS.iter().find(|p| **p == word) {
            self.pos += 1;
            return Ok(SFun::Prim(p, 0));
        }
        match word.as_str() {
            "pow" => {
                self.pos += 1;
                if self.eat(&Tok::Minus) {
                    let k = self.nat("a power exponent")?;
                    return Ok(SFun::Prim("pow", -(k as i32)));
                }
                let x = self.index()?;
                if self.starts_fun_atom() {
                    let body = self.fun_post()?;
                    Ok(SFun::PowFun(x, Box::new(body)))
                } else if let SIndex::Seg(k) = x {
                    Ok(SFun::Prim("pow", k as i32))
                } else {
                    Err(self.err("a function after `pow <index set>`"))
                }
            }
            "const" => {
                self.pos += 1;
                Ok(SFun::Const(self.vector()?))
            }
            "lin" => {
                self.pos += 1;
                self.expect(Tok::LParen, "`(` after lin")?;
                let h = self.lin()?;
                self.expect(Tok::RParen, "`)` closing lin(...)")?;
                Ok(SFun::LinTerm(h))
            }
            "par" => {
                self.pos += 1;
                Ok(SFun::Par(self.paren_list(Parser::fun)?))
            }
            "tensor" => {
                // `tensor {` is a vector literal (inside const), bare
                // `tensor` is the bilinear tensor product.
                if self.peek2() == Some(&Tok::LBrace) {
                    Err(self.err("a function term (tensor literals belong after `const`)"))
                } else {
                    self.pos += 1;
                    Ok(SFun::Bilin("tensor"))
                }
            }
            other => {
                if let Some(b) = BILINS.iter().find(|b| **b == word) {
                    self.pos += 1;
                    return Ok(SFun::Bilin(b));
                }
                // any linear atom is a function term
                if UNITARIES.contains(&other)
                    || matches!(
                        other,
                        "id" | "zero"
                            | "proj"
                            | "inj"
                            | "fanout"
                            | "red"
                            | "contractL"
                            | "contractR"
                            | "dup"
                            | "sum"
                            | "rep"
                            | "scan"
                    )
                {
                    return Ok(SFun::LinTerm(self.lin_atom()?));
                }
                Err(self.err(&format!("a function-term atom (found `{other}`)")))
            }
        }
    }
}

fn finish<T>(mut p: Parser, parse: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let out = parse(&mut p)?;
    if !p.done() {
        return Err(p.err("end of input"));
    }
    Ok(out)
}

pub fn parse_vec_surface(src: &str) -> Result<SVec> {
    finish(Parser::new(src)?, Parser::vector)
}

pub fn parse_lin_surface(src: &str) -> Result<SLin> {
    finish(Parser::new(src)?, Parser::lin)
}

pub fn parse_fun_surface(src: &str) -> Result<SFun> {
    finish(Parser::new(src)?, Parser::fun)
}

pub fn parse_space_surface(src: &str) -> Result<SSpace> {
    finish(Parser::new(src)?, Parser::space)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators_and_numbers() {
        let toks = lex("2.5 *. @ [3]R -> R (x)").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|s| s.tok).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Num(2.5),
                Tok::ScaleOp,
                Tok::At,
                Tok::LBracket,
                Tok::Num(3.0),
                Tok::RBracket,
                Tok::Ident("R".into()),
                Tok::Arrow,
                Tok::Ident("R".into()),
                Tok::TensorOp,
            ]
        );
    }

    #[test]
    fn parses_composition_and_sugar() {
        let t = parse_fun_surface("ln . proj 1 + (proj 1 * proj 2) - sin . proj 2").unwrap();
        // Shape: Sub(Add(Comp(ln, proj1), Mul(proj1, proj2)), Comp(sin, proj2))
        match t {
            SFun::Sub(a, b) => {
                assert!(matches!(*a, SFun::Add(_, _)));
                assert!(matches!(*b, SFun::Comp(_, _)));
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn parses_relations() {
        let t = parse_lin_surface("red {(1,1),(2,1),(3,1)}").unwrap();
        match t {
            SLin::Red(pairs) => assert_eq!(pairs.len(), 3),
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn parses_tensor_literals() {
        let v = parse_vec_surface("tensor{ 1 * (1,0) (x) (0,1) }").unwrap();
        match v {
            SVec::Tensor(terms) => {
                assert_eq!(terms.len(), 1);
                assert_eq!(terms[0].0, 1.0);
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_lin_surface("proj x").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 6);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn pow_is_both_a_primitive_and_a_parallel_map() {
        assert!(matches!(
            parse_fun_surface("pow 3").unwrap(),
            SFun::Prim("pow", 3)
        ));
        assert!(matches!(
            parse_fun_surface("pow -1").unwrap(),
            SFun::Prim("pow", -1)
        ));
        assert!(matches!(
            parse_fun_surface("pow 3 sin").unwrap(),
            SFun::PowFun(SIndex::Seg(3), _)
        ));
    }
}

//! Constraint expressions: a product/quotient of names, literals and square
//! roots of literals, e.g. `sqrt(2)*delta` or `rabi2/2`.

#[derive(Debug, Clone, PartialEq)]
enum Atom {
    Number(f64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Factor {
    negate: bool,
    atom: Atom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    first: Factor,
    rest: Vec<(Op, Factor)>,
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn number(&mut self) -> Result<f64, String> {
        let start = self.pos;
        let bytes = self.s.as_bytes();
        while self.pos < bytes.len()
            && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = mark;
            }
        }
        let text = &self.s[start..self.pos];
        text.parse::<f64>()
            .map_err(|_| format!("bad number `{text}`"))
    }

    fn name(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.s[start..self.pos].to_string()
    }

    fn sqrt_argument(&mut self, parens: bool) -> Result<f64, String> {
        self.skip_ws();
        if parens && self.bump() != Some('(') {
            return Err("expected `(` after sqrt".into());
        }
        self.skip_ws();
        let v = self.number()?;
        self.skip_ws();
        if parens && self.bump() != Some(')') {
            return Err("expected `)` closing sqrt".into());
        }
        if v < 0.0 {
            return Err("sqrt of a negative literal".into());
        }
        Ok(v.sqrt())
    }

    fn factor(&mut self) -> Result<Factor, String> {
        self.skip_ws();
        let mut negate = false;
        while self.peek() == Some('-') {
            self.bump();
            negate = !negate;
            self.skip_ws();
        }
        let atom = match self.peek() {
            None => return Err("unexpected end of expression".into()),
            Some('√') => {
                self.bump();
                Atom::Number(self.sqrt_argument(false)?)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Atom::Number(self.number()?),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.name();
                if name == "sqrt" {
                    Atom::Number(self.sqrt_argument(true)?)
                } else {
                    Atom::Name(name)
                }
            }
            Some(c) => return Err(format!("unexpected character `{c}`")),
        };
        Ok(Factor { negate, atom })
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, String> {
        let mut cur = Cursor { s: source, pos: 0 };
        let first = cur.factor()?;
        let mut rest = Vec::new();
        loop {
            cur.skip_ws();
            let op = match cur.bump() {
                None => break,
                Some('*') => Op::Mul,
                Some('/') => Op::Div,
                Some(c) => return Err(format!("unexpected character `{c}` in `{source}`")),
            };
            rest.push((op, cur.factor()?));
        }
        Ok(Self {
            source: source.to_string(),
            first,
            rest,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(&self.first)
            .chain(self.rest.iter().map(|(_, f)| f))
            .filter_map(|f| match &f.atom {
                Atom::Name(n) => Some(n.as_str()),
                Atom::Number(_) => None,
            })
    }

    pub fn eval<F>(&self, lookup: F) -> Result<f64, String>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let value = |f: &Factor| -> Result<f64, String> {
            let v = match &f.atom {
                Atom::Number(v) => *v,
                Atom::Name(n) => lookup(n).ok_or_else(|| format!("unknown name `{n}`"))?,
            };
            Ok(if f.negate { -v } else { v })
        };
        let mut acc = value(&self.first)?;
        for (op, f) in &self.rest {
            let v = value(f)?;
            match op {
                Op::Mul => acc *= v,
                Op::Div => acc /= v,
            }
        }
        Ok(acc)
    }

    pub fn eval_constant(&self) -> Result<f64, String> {
        self.eval(|_| None)
    }
}

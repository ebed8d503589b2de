//! Numeric expressions for angle and coefficient flags: `pi/4`,
//! `sqrt(2/5)`, `-1.5e-3`, `2*acos(0.3)`.
//!
//! Grammar (all arithmetic in f64):
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | '+' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | name '(' expr ')' | '(' expr ')'
//! ```

use std::iter::Peekable;
use std::str::Chars;

pub fn eval(src: &str) -> Result<f64, String> {
    let mut p = Parser {
        chars: src.chars().peekable(),
        src,
    };
    let v = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.chars.peek() {
        return Err(format!("unexpected `{c}` in `{src}`"));
    }
    if !v.is_finite() {
        return Err(format!("`{src}` is not a finite number"));
    }
    Ok(v)
}

struct Parser<'a> {
    chars: Peekable<Chars<'a>>,
    src: &'a str,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.next_if(|c| c.is_whitespace()).is_some() {}
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        self.chars.next_if_eq(&want).is_some()
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, String> {
        self.skip_ws();
        if self.eat('(') {
            let v = self.expr()?;
            if !self.eat(')') {
                return Err(format!("missing `)` in `{}`", self.src));
            }
            return Ok(v);
        }
        match self.chars.peek() {
            Some(c) if c.is_ascii_digit() || *c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(c) = self.chars.next_if(|c| c.is_ascii_alphanumeric()) {
                    name.push(c);
                }
                if name == "pi" {
                    return Ok(std::f64::consts::PI);
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sqrt" => f64::sqrt,
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "asin" => f64::asin,
                    "acos" => f64::acos,
                    "atan" => f64::atan,
                    _ => return Err(format!("unknown name `{name}` in `{}`", self.src)),
                };
                if !self.eat('(') {
                    return Err(format!("`{name}` needs parentheses in `{}`", self.src));
                }
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(format!("missing `)` in `{}`", self.src));
                }
                Ok(f(v))
            }
            Some(c) => Err(format!("unexpected `{c}` in `{}`", self.src)),
            None => Err(format!("incomplete expression `{}`", self.src)),
        }
    }

    fn number(&mut self) -> Result<f64, String> {
        let mut text = String::new();
        while let Some(c) = self.chars.next_if(|c| c.is_ascii_digit() || *c == '.') {
            text.push(c);
        }
        if let Some(e) = self.chars.next_if(|c| *c == 'e' || *c == 'E') {
            text.push(e);
            if let Some(s) = self.chars.next_if(|c| *c == '-' || *c == '+') {
                text.push(s);
            }
            while let Some(c) = self.chars.next_if(|c| c.is_ascii_digit()) {
                text.push(c);
            }
        }
        text.parse()
            .map_err(|_| format!("bad number `{text}` in `{}`", self.src))
    }
}

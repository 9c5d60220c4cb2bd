//! Tiny arithmetic expression grammar for initial-condition strings.
//!
//! Operators `+ - * / ^` (with unary minus; `^` binds tightest and is
//! right-associative), functions `sin`, `cos`, `exp`, the constant `pi`
//! and the variables `x`, `y`. In shadow (reference-phase) expressions
//! `y` is bound to the time coordinate.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError(pub String);

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expression error: {}", self.0)
    }
}

impl std::error::Error for ExprError {}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let e = parser.parse_expr(0)?;
        if parser.pos != parser.tokens.len() {
            return Err(ExprError(format!(
                "trailing input starting at token {:?}",
                parser.tokens[parser.pos]
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(e) => -e.eval(x, y),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x, y), b.eval(x, y));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x, y);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit.parse().map_err(|e| ExprError(format!("bad number '{lit}': {e}")))?;
                tokens.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                tokens.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(ExprError(format!("unexpected character '{other}'"))),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Pratt parser: min_bp selects the binding floor.
    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        let mut lhs = match self.next() {
            Some(Token::Num(v)) => Expr::Num(v),
            Some(Token::Ident(name)) => match name.as_str() {
                "pi" => Expr::Num(std::f64::consts::PI),
                "x" => Expr::Var(Var::X),
                "y" => Expr::Var(Var::Y),
                "sin" | "cos" | "exp" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    match self.next() {
                        Some(Token::LParen) => {}
                        other => {
                            return Err(ExprError(format!(
                                "expected '(' after {name}, found {other:?}"
                            )))
                        }
                    }
                    let arg = self.parse_expr(0)?;
                    match self.next() {
                        Some(Token::RParen) => {}
                        other => {
                            return Err(ExprError(format!(
                                "expected ')' closing {name}, found {other:?}"
                            )))
                        }
                    }
                    Expr::Call(func, Box::new(arg))
                }
                other => return Err(ExprError(format!("unknown identifier '{other}'"))),
            },
            Some(Token::Minus) => {
                // Unary minus binds tighter than * but looser than ^.
                let operand = self.parse_expr(5)?;
                Expr::Neg(Box::new(operand))
            }
            Some(Token::LParen) => {
                let inner = self.parse_expr(0)?;
                match self.next() {
                    Some(Token::RParen) => inner,
                    other => return Err(ExprError(format!("expected ')', found {other:?}"))),
                }
            }
            other => return Err(ExprError(format!("expected an operand, found {other:?}"))),
        };
        loop {
            let (op, lbp, rbp) = match self.peek() {
                Some(Token::Plus) => (Op::Add, 1, 2),
                Some(Token::Minus) => (Op::Sub, 1, 2),
                Some(Token::Star) => (Op::Mul, 3, 4),
                Some(Token::Slash) => (Op::Div, 3, 4),
                Some(Token::Caret) => (Op::Pow, 7, 6), // right-assoc
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.next();
            let rhs = self.parse_expr(rbp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eval(text: &str, x: f64, y: f64) -> f64 {
        Expr::parse(text).unwrap().eval(x, y)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(eval("2 ^ 3 ^ 2", 0.0, 0.0), 512.0); // right-assoc
        assert_eq!(eval("-2 ^ 2", 0.0, 0.0), -4.0); // ^ binds tighter
        assert_eq!(eval("6 / 3 / 2", 0.0, 0.0), 1.0); // left-assoc
        assert_eq!(eval("1 - 2 - 3", 0.0, 0.0), -4.0);
    }

    #[test]
    fn variables_functions_constants() {
        assert!((eval("sin(x) + cos(y)", PI / 2.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((eval("exp(0) + pi", 0.0, 0.0) - (1.0 + PI)).abs() < 1e-15);
        assert_eq!(eval("2 * x - y / 2", 3.0, 4.0), 4.0);
        assert!((eval("sin(2*pi*x)", 0.25, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(eval("1e-3 + 2.5E2", 0.0, 0.0), 250.001);
    }

    #[test]
    fn errors_are_reported() {
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("sin x").is_err());
        assert!(Expr::parse("foo(1)").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(Expr::parse("1 $ 2").is_err());
    }
}

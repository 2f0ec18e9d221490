use crate::ast::{BinOp, Constant, Expr, Func, Var, PREFIX_BP};
use crate::error::ParseError;
use crate::lexer::{tokenize, Tok};

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            found: self.peek().describe(),
            expected,
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![name]))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Caret => BinOp::Pow,
                Tok::RParen | Tok::End => break,
                _ => return Err(self.error(vec!["operator", "`)`", "end of input"])),
            };
            let (l, r) = op.binding_power();
            if l < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(r)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        if matches!(
            self.peek(),
            Tok::Star | Tok::Slash | Tok::Caret | Tok::Plus | Tok::RParen | Tok::End
        ) {
            return Err(self.error(vec!["number", "identifier", "`-`", "`(`"]));
        }
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => Ok(Expr::neg(self.expr(PREFIX_BP)?)),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(`")?;
                    let arg = self.expr(0)?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::call(func, arg));
                }
                match name.as_str() {
                    "t" => Ok(Expr::Var(Var::T)),
                    "i" => Ok(Expr::Var(Var::I)),
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    _ => Err(ParseError::UnknownIdentifier { name, offset }),
                }
            }
            _ => unreachable!("operators and terminators are rejected above"),
        }
    }
}

/// Parses an expression in `t`, `i`, `pi`, `e`.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    if toks.len() == 1 {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr(0)?;
    if *p.peek() != Tok::End {
        // only a stray `)` can stop the top-level loop early
        return Err(p.error(vec!["operator", "end of input"]));
    }
    Ok(e)
}

use super::{Action, Fixpoint, Formula, Node, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Mu,
    Nu,
    Tilde,
    Pipe,
    Amp,
    Lt,
    Gt,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Quote,
    Comma,
    Trace,
    NegTrace,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Mu => "`mu`".into(),
            Tok::Nu => "`nu`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Quote => "`'`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Trace => "`~>`".into(),
            Tok::NegTrace => "`!~>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            b'a'..=b'z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                out.push((
                    match word {
                        "mu" => Tok::Mu,
                        "nu" => Tok::Nu,
                        _ => Tok::Ident(word.to_string()),
                    },
                    start,
                ));
                continue;
            }
            b'~' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Trace
            }
            b'!' if bytes.get(i + 1) == Some(&b'~') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Tok::NegTrace
            }
            b'~' => Tok::Tilde,
            b'|' => Tok::Pipe,
            b'&' => Tok::Amp,
            b'<' => Tok::Lt,
            b'>' => Tok::Gt,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'.' => Tok::Dot,
            b'\'' => Tok::Quote,
            b',' => Tok::Comma,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(SyntaxError::Parse {
                    pos: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Token-level parser shared by the formula and sequent readers.
pub(crate) struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    scope: Vec<String>,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Parser, SyntaxError> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            scope: Vec::new(),
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.pos(),
            message: message.into(),
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    pub(crate) fn expect_eof(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => Err(self.error(format!("unexpected {}", t.describe()))),
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn action(&mut self, close: Tok) -> Result<Action, SyntaxError> {
        let name = match self.bump() {
            Tok::Ident(name) => name,
            t => return Err(self.error(format!("expected action name, found {}", t.describe()))),
        };
        let mut converse = false;
        while *self.peek() == Tok::Quote {
            self.bump();
            converse = !converse;
        }
        self.expect(close)?;
        Ok(Action::with_direction(&name, converse))
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let start = self.pos();
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                if let Tok::Ident(name) = self.peek().clone() {
                    if self.scope.contains(&name) {
                        return Err(SyntaxError::NegatedVariable { name, pos: start });
                    }
                }
                let inner = self.unary()?;
                if !inner.is_closed() {
                    return Err(SyntaxError::Parse {
                        pos: start,
                        message: "negation applied to a formula with free fixpoint variables"
                            .into(),
                    });
                }
                Ok(inner.negate())
            }
            Tok::Lt => {
                self.bump();
                let a = self.action(Tok::Gt)?;
                Ok(Formula::diamond(a, self.unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let a = self.action(Tok::RBracket)?;
                Ok(Formula::boxed(a, self.unary()?))
            }
            Tok::Mu | Tok::Nu => {
                let kind = if self.bump() == Tok::Mu {
                    Fixpoint::Mu
                } else {
                    Fixpoint::Nu
                };
                let name = match self.bump() {
                    Tok::Ident(name) => name,
                    t => {
                        return Err(
                            self.error(format!("expected variable name, found {}", t.describe()))
                        )
                    }
                };
                self.expect(Tok::Dot)?;
                self.scope.push(name);
                let body = self.formula();
                self.scope.pop();
                let body = body?;
                if body.var_under_dual(kind, 0, false) {
                    let phi = Formula::fix(kind, body);
                    return Err(SyntaxError::AlternationViolation {
                        formula: phi.to_string(),
                        pos: start,
                    });
                }
                Ok(Formula::fix(kind, body))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                match self.scope.iter().rposition(|s| *s == name) {
                    Some(i) => Ok(Formula::var((self.scope.len() - 1 - i) as u32)),
                    None => Ok(Formula::prop(&name)),
                }
            }
            t => Err(self.error(format!("expected a formula, found {}", t.describe()))),
        }
    }
}

/// Parses a closed, alternation-free formula.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text)?;
    let phi = p.formula()?;
    p.expect_eof()?;
    debug_assert!(phi.is_closed());
    debug_assert!(!matches!(phi.node(), Node::Var(_)));
    Ok(phi)
}

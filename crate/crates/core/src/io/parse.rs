use thiserror::Error;

use super::{ActivatorDecl, BaseDecl, CondDecl, Item, MetaDecl, MetaKeyword, ProblemDocument, VarDecl};
use crate::model::{ActivatorMode, Relation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Comment(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Eq,
    NotEq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Comment(_) => "comment".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::NotEq => "`!=`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    // True while only whitespace has been seen on the current line.
    let mut line_start = true;
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let err = |m: String| ParseError {
            line: l,
            column: col,
            message: m,
        };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            ch
        };
        if c == '\n' {
            bump(&mut chars);
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = match c {
            '#' => {
                let mut s = String::new();
                bump(&mut chars);
                while let Some(&ch) = chars.peek() {
                    if ch == '\n' {
                        break;
                    }
                    s.push(ch);
                    bump(&mut chars);
                }
                if line_start {
                    Some(Tok::Comment(s.trim().to_string()))
                } else {
                    None
                }
            }
            '{' | '}' | '[' | ']' | ':' | '=' => {
                bump(&mut chars);
                Some(match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ':' => Tok::Colon,
                    _ => Tok::Eq,
                })
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Some(Tok::NotEq)
                } else {
                    return Err(err("expected `=` after `!`".into()));
                }
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match bump(&mut chars) {
                        None | Some('\n') => return Err(err("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => match bump(&mut chars) {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            _ => return Err(err("bad escape in string".into())),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                Some(Tok::Str(s))
            }
            c if is_word_char(c) => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if !is_word_char(ch) {
                        break;
                    }
                    s.push(ch);
                    bump(&mut chars);
                }
                Some(Tok::Word(s))
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        };
        line_start = false;
        if let Some(tok) = tok {
            out.push(Spanned {
                tok,
                line: l,
                column: col,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn error_here(&self, message: String) -> ParseError {
        let (line, column) = self
            .toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.end);
        ParseError {
            line,
            column,
            message,
        }
    }

    fn found(&self) -> String {
        self.peek()
            .map(Tok::describe)
            .unwrap_or_else(|| "end of input".into())
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                want.describe(),
                self.found()
            )))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error_here(format!("expected {what}, found {}", self.found()))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_here(format!("expected `{kw}`, found {}", self.found()))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w == kw)
    }

    fn int(&mut self, what: &str) -> Result<usize, ParseError> {
        let save = self.pos;
        let w = self.word(what)?;
        w.parse().map_err(|_| {
            self.pos = save;
            self.error_here(format!("expected {what} as an integer, found `{w}`"))
        })
    }

    /// `[ ID* ]`; at least one id when `non_empty`.
    fn id_list(&mut self, non_empty: bool) -> Result<Vec<String>, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut ids = Vec::new();
        while let Some(Tok::Word(_)) = self.peek() {
            ids.push(self.word("id")?);
        }
        if non_empty && ids.is_empty() {
            return Err(self.error_here("expected at least one id".into()));
        }
        self.expect(Tok::RBracket)?;
        Ok(ids)
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        if let Some(Tok::Comment(c)) = self.peek() {
            let c = c.clone();
            self.pos += 1;
            return Ok(Item::Comment(c));
        }
        let kw = self.word("a declaration")?;
        match kw.as_str() {
            "var" => {
                let name = self.word("variable id")?;
                self.expect(Tok::LBrace)?;
                let mut domain = Vec::new();
                while let Some(Tok::Word(_)) = self.peek() {
                    domain.push(self.word("value")?);
                }
                if domain.is_empty() {
                    return Err(self.error_here("expected at least one domain value".into()));
                }
                self.expect(Tok::RBrace)?;
                let initial = self.at_keyword("initial");
                if initial {
                    self.pos += 1;
                }
                Ok(Item::Var(VarDecl {
                    name,
                    domain,
                    initial,
                }))
            }
            "base" => {
                let name = self.word("constraint id")?;
                self.expect(Tok::Colon)?;
                let var = self.word("variable id")?;
                let relation = match self.peek() {
                    Some(Tok::Eq) => Relation::Equal,
                    Some(Tok::NotEq) => Relation::NotEqual,
                    _ => {
                        return Err(
                            self.error_here(format!("expected `=` or `!=`, found {}", self.found()))
                        )
                    }
                };
                self.pos += 1;
                let value = self.word("value")?;
                Ok(Item::Base(BaseDecl {
                    name,
                    var,
                    relation,
                    value,
                }))
            }
            "meta" | "receiver" | "allreceiver" | "top" => {
                let keyword = match kw.as_str() {
                    "meta" => MetaKeyword::Meta,
                    "receiver" => MetaKeyword::Receiver,
                    "allreceiver" => MetaKeyword::AllReceiver,
                    _ => MetaKeyword::Top,
                };
                let name = self.word("constraint id")?;
                let bounds = if keyword.takes_bounds() {
                    self.keyword("min")?;
                    let min = self.int("min")?;
                    self.keyword("max")?;
                    let max = self.int("max")?;
                    Some((min, max))
                } else {
                    None
                };
                self.keyword("children")?;
                let children = self.id_list(false)?;
                Ok(Item::Meta(MetaDecl {
                    name,
                    keyword,
                    bounds,
                    children,
                }))
            }
            "activator" => {
                let name = self.word("activator id")?;
                self.keyword("when")?;
                let condition = match self.word("`satisfied` or `variable-active`")?.as_str() {
                    "satisfied" => CondDecl::Satisfied(self.word("constraint id")?),
                    "variable-active" => CondDecl::VariableActive(self.word("variable id")?),
                    other => {
                        self.pos -= 1;
                        return Err(self.error_here(format!(
                            "expected `satisfied` or `variable-active`, found `{other}`"
                        )));
                    }
                };
                let mode = match self.word("`activate` or `require-inactive`")?.as_str() {
                    "activate" => ActivatorMode::Activate,
                    "require-inactive" => ActivatorMode::RequireInactive,
                    other => {
                        self.pos -= 1;
                        return Err(self.error_here(format!(
                            "expected `activate` or `require-inactive`, found `{other}`"
                        )));
                    }
                };
                let targets = self.id_list(true)?;
                Ok(Item::Activator(ActivatorDecl {
                    name,
                    condition,
                    mode,
                    targets,
                }))
            }
            "active" => Ok(Item::Active(self.id_list(true)?)),
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("unknown declaration `{other}`")))
            }
        }
    }
}

/// Parses `.dmc` text. Reports the first syntax error with its position.
pub fn parse(text: &str) -> Result<ProblemDocument, ParseError> {
    let toks = lex(text)?;
    let end = {
        let lines: Vec<&str> = text.split('\n').collect();
        (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1)
    };
    let mut p = Parser { toks, pos: 0, end };
    let mut items = Vec::new();
    while let Some(Tok::Comment(c)) = p.peek() {
        items.push(Item::Comment(c.clone()));
        p.pos += 1;
    }
    p.keyword("problem")?;
    let name = match p.peek() {
        Some(Tok::Str(s)) => {
            let s = s.clone();
            p.pos += 1;
            s
        }
        _ => return Err(p.error_here(format!("expected problem name string, found {}", p.found()))),
    };
    while p.peek().is_some() {
        items.push(p.item()?);
    }
    Ok(ProblemDocument { name, items })
}

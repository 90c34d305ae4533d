//! Hand-rolled lexer.
//!
//! The only unusual part is annotation handling: `/*@ ... */` blocks and
//! `//@ ...` lines switch the lexer into annotation mode, where backslash
//! keywords (`\old`, `\forall`, ...) and the range token `..` become legal and
//! decorative `@` characters (ACSL-style line leaders) are skipped as
//! whitespace. Plain comments are discarded as usual.

use super::ast::Loc;
use super::LangError;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // code keywords
    KwInt,
    KwBool,
    KwVoid,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwTrue,
    KwFalse,
    // annotation keywords
    BsOld,
    BsResult,
    BsForall,
    BsExists,
    BsTrue,
    BsFalse,
    BsNothing,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    PlusEq,
    MinusEq,
    StarEq,
    PlusPlus,
    MinusMinus,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    AndAnd,
    OrOr,
    Implies,
    DotDot,
    /// Start of an annotation block or line.
    AnnotStart,
    /// End of an annotation block or line.
    AnnotEnd,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::KwInt => f.write_str("`int`"),
            Tok::KwBool => f.write_str("`bool`"),
            Tok::KwVoid => f.write_str("`void`"),
            Tok::KwIf => f.write_str("`if`"),
            Tok::KwElse => f.write_str("`else`"),
            Tok::KwWhile => f.write_str("`while`"),
            Tok::KwReturn => f.write_str("`return`"),
            Tok::KwTrue => f.write_str("`true`"),
            Tok::KwFalse => f.write_str("`false`"),
            Tok::BsOld => f.write_str("`\\old`"),
            Tok::BsResult => f.write_str("`\\result`"),
            Tok::BsForall => f.write_str("`\\forall`"),
            Tok::BsExists => f.write_str("`\\exists`"),
            Tok::BsTrue => f.write_str("`\\true`"),
            Tok::BsFalse => f.write_str("`\\false`"),
            Tok::BsNothing => f.write_str("`\\nothing`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::PlusEq => f.write_str("`+=`"),
            Tok::MinusEq => f.write_str("`-=`"),
            Tok::StarEq => f.write_str("`*=`"),
            Tok::PlusPlus => f.write_str("`++`"),
            Tok::MinusMinus => f.write_str("`--`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Percent => f.write_str("`%`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Not => f.write_str("`!`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Implies => f.write_str("`==>`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::AnnotStart => f.write_str("start of annotation"),
            Tok::AnnotEnd => f.write_str("end of annotation"),
            Tok::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub loc: Loc,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    /// Inside `/*@ ... */`?
    in_block_annot: bool,
    /// Inside `//@ ...`?
    in_line_annot: bool,
    out: Vec<Spanned>,
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, LangError> {
    let mut lx = Lexer {
        src: src.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        in_block_annot: false,
        in_line_annot: false,
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl<'a> Lexer<'a> {
    fn loc(&self) -> Loc {
        Loc {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn peek3(&self) -> Option<u8> {
        self.src.get(self.pos + 2).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
            if self.in_line_annot {
                // a //@ annotation ends with its line
                self.in_line_annot = false;
                self.out.push(Spanned {
                    tok: Tok::AnnotEnd,
                    loc: self.loc(),
                });
            }
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, loc: Loc) {
        self.out.push(Spanned { tok, loc });
    }

    fn in_annot(&self) -> bool {
        self.in_block_annot || self.in_line_annot
    }

    fn run(&mut self) -> Result<(), LangError> {
        loop {
            // skip whitespace (and decorative '@' inside annotations)
            while let Some(c) = self.peek() {
                if c.is_ascii_whitespace() || (self.in_annot() && c == b'@') {
                    self.bump();
                } else {
                    break;
                }
            }
            let loc = self.loc();
            let Some(c) = self.peek() else {
                if self.in_block_annot {
                    return Err(LangError::Lex {
                        loc,
                        msg: "unterminated annotation block".into(),
                    });
                }
                self.push(Tok::Eof, loc);
                return Ok(());
            };
            match c {
                b'/' if !self.in_annot() && self.peek2() == Some(b'*') => {
                    if self.peek3() == Some(b'@') {
                        self.bump();
                        self.bump();
                        self.bump();
                        self.in_block_annot = true;
                        self.push(Tok::AnnotStart, loc);
                    } else {
                        // plain block comment
                        self.bump();
                        self.bump();
                        loop {
                            match self.bump() {
                                Some(b'*') if self.peek() == Some(b'/') => {
                                    self.bump();
                                    break;
                                }
                                Some(_) => {}
                                None => {
                                    return Err(LangError::Lex {
                                        loc,
                                        msg: "unterminated comment".into(),
                                    })
                                }
                            }
                        }
                    }
                }
                b'/' if !self.in_annot() && self.peek2() == Some(b'/') => {
                    if self.peek3() == Some(b'@') {
                        self.bump();
                        self.bump();
                        self.bump();
                        self.in_line_annot = true;
                        self.push(Tok::AnnotStart, loc);
                    } else {
                        while let Some(c) = self.peek() {
                            if c == b'\n' {
                                break;
                            }
                            self.bump();
                        }
                    }
                }
                b'*' if self.in_block_annot && self.peek2() == Some(b'/') => {
                    self.bump();
                    self.bump();
                    self.in_block_annot = false;
                    self.push(Tok::AnnotEnd, loc);
                }
                b'\\' => {
                    if !self.in_annot() {
                        return Err(LangError::Lex {
                            loc,
                            msg: "`\\` keywords are only allowed inside annotations".into(),
                        });
                    }
                    self.bump();
                    let word = self.take_ident_text();
                    let tok = match word.as_str() {
                        "old" => Tok::BsOld,
                        "result" => Tok::BsResult,
                        "forall" => Tok::BsForall,
                        "exists" => Tok::BsExists,
                        "true" => Tok::BsTrue,
                        "false" => Tok::BsFalse,
                        "nothing" => Tok::BsNothing,
                        other => {
                            return Err(LangError::Lex {
                                loc,
                                msg: format!("unknown annotation keyword `\\{other}`"),
                            })
                        }
                    };
                    self.push(tok, loc);
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let word = self.take_ident_text();
                    let tok = match word.as_str() {
                        "int" => Tok::KwInt,
                        "bool" => Tok::KwBool,
                        "void" => Tok::KwVoid,
                        "if" => Tok::KwIf,
                        "else" => Tok::KwElse,
                        "while" => Tok::KwWhile,
                        "return" => Tok::KwReturn,
                        "true" => Tok::KwTrue,
                        "false" => Tok::KwFalse,
                        _ => Tok::Ident(word),
                    };
                    self.push(tok, loc);
                }
                c if c.is_ascii_digit() => {
                    let mut text = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() {
                            text.push(c as char);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let value: i64 = text.parse().map_err(|_| LangError::Lex {
                        loc,
                        msg: format!("integer literal `{text}` out of range"),
                    })?;
                    self.push(Tok::Int(value), loc);
                }
                _ => {
                    let tok = self.take_operator(loc)?;
                    self.push(tok, loc);
                }
            }
        }
    }

    fn take_ident_text(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                s.push(c as char);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn take_operator(&mut self, loc: Loc) -> Result<Tok, LangError> {
        let c = self.bump().unwrap();
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b';' => Tok::Semi,
            b',' => Tok::Comma,
            b'+' => match self.peek() {
                Some(b'=') => {
                    self.bump();
                    Tok::PlusEq
                }
                Some(b'+') => {
                    self.bump();
                    Tok::PlusPlus
                }
                _ => Tok::Plus,
            },
            b'-' => match self.peek() {
                Some(b'=') => {
                    self.bump();
                    Tok::MinusEq
                }
                Some(b'-') => {
                    self.bump();
                    Tok::MinusMinus
                }
                _ => Tok::Minus,
            },
            b'*' => match self.peek() {
                Some(b'=') => {
                    self.bump();
                    Tok::StarEq
                }
                _ => Tok::Star,
            },
            b'/' => Tok::Slash,
            b'%' => Tok::Percent,
            b'=' => match (self.peek(), self.peek2()) {
                (Some(b'='), Some(b'>')) => {
                    self.bump();
                    self.bump();
                    Tok::Implies
                }
                (Some(b'='), _) => {
                    self.bump();
                    Tok::EqEq
                }
                _ => Tok::Assign,
            },
            b'!' => match self.peek() {
                Some(b'=') => {
                    self.bump();
                    Tok::Ne
                }
                _ => Tok::Not,
            },
            b'<' => match self.peek() {
                Some(b'=') => {
                    self.bump();
                    Tok::Le
                }
                _ => Tok::Lt,
            },
            b'>' => match self.peek() {
                Some(b'=') => {
                    self.bump();
                    Tok::Ge
                }
                _ => Tok::Gt,
            },
            b'&' => match self.peek() {
                Some(b'&') => {
                    self.bump();
                    Tok::AndAnd
                }
                _ => {
                    return Err(LangError::Lex {
                        loc,
                        msg: "expected `&&` (bitwise `&` is not supported)".into(),
                    })
                }
            },
            b'|' => match self.peek() {
                Some(b'|') => {
                    self.bump();
                    Tok::OrOr
                }
                _ => {
                    return Err(LangError::Lex {
                        loc,
                        msg: "expected `||` (bitwise `|` is not supported)".into(),
                    })
                }
            },
            b'.' => match self.peek() {
                Some(b'.') => {
                    self.bump();
                    Tok::DotDot
                }
                _ => {
                    return Err(LangError::Lex {
                        loc,
                        msg: "expected `..`".into(),
                    })
                }
            },
            other => {
                return Err(LangError::Lex {
                    loc,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(tok)
    }
}

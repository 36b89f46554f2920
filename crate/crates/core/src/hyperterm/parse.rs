use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{symbol_is_reserved, FinitaryType, Head, HyperTerm, Identity, RhoIdentity, RhoTerm, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    TrailingInput,
    UnknownSymbol(String),
    /// `e<i>` or `v<i>` followed by an argument list.
    ReservedApplied(String),
    ZeroIndex,
    ArityMismatch { symbol: String, expected: usize, found: usize },
    MissingEquals,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub pos: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected `{c}`")?,
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input")?,
            ParseErrorKind::TrailingInput => f.write_str("trailing input")?,
            ParseErrorKind::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`")?,
            ParseErrorKind::ReservedApplied(s) => write!(f, "`{s}` is reserved and takes no arguments")?,
            ParseErrorKind::ZeroIndex => f.write_str("indices start at 1")?,
            ParseErrorKind::ArityMismatch { symbol, expected, found } => {
                write!(f, "`{symbol}` takes {expected} arguments, got {found}")?
            }
            ParseErrorKind::MissingEquals => f.write_str("expected `lhs = rhs`")?,
        }
        write!(f, " at byte {}", self.pos)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

#[derive(Debug, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Open,
    Close,
    Comma,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, offset: usize) -> Self {
        Lexer { src, pos: offset }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Result<(usize, Tok<'a>), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            '(' => Tok::Open,
            ')' => Tok::Close,
            ',' => Tok::Comma,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                Tok::Ident(&rest[..len])
            }
            c => {
                return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(c), pos: start })
            }
        };
        Ok((start, tok))
    }

    fn bump(&mut self, tok: &Tok<'_>) {
        self.pos += match tok {
            Tok::Ident(s) => s.len(),
            Tok::End => 0,
            _ => 1,
        };
    }

    fn next(&mut self) -> Result<(usize, Tok<'a>), ParseError> {
        let (p, t) = self.peek()?;
        self.bump(&t);
        Ok((p, t))
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.peek()? {
            (_, Tok::End) => Ok(()),
            (pos, _) => Err(ParseError { kind: ParseErrorKind::TrailingInput, pos }),
        }
    }

    /// Optional parenthesized argument list after an identifier.
    fn args<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Option<Vec<T>>, ParseError> {
        if self.peek()?.1 != Tok::Open {
            return Ok(None);
        }
        self.next()?;
        let mut out = Vec::new();
        loop {
            out.push(item(self)?);
            match self.next()? {
                (_, Tok::Comma) => continue,
                (_, Tok::Close) => break,
                (pos, Tok::End) => {
                    return Err(ParseError { kind: ParseErrorKind::UnexpectedEnd, pos })
                }
                (pos, _) => {
                    let c = self.src[pos..].chars().next().unwrap_or(' ');
                    return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(c), pos });
                }
            }
        }
        Ok(Some(out))
    }
}

fn reserved_index(name: &str, prefix: char, pos: usize) -> Result<Option<usize>, ParseError> {
    if !symbol_is_reserved(name) || !name.starts_with(prefix) {
        return Ok(None);
    }
    match name[1..].parse::<usize>() {
        Ok(0) => Err(ParseError { kind: ParseErrorKind::ZeroIndex, pos }),
        Ok(i) => Ok(Some(i)),
        // too many digits
        Err(_) => Err(ParseError { kind: ParseErrorKind::UnknownSymbol(name.into()), pos }),
    }
}

fn unexpected(lx: &Lexer<'_>, pos: usize, tok: &Tok<'_>) -> ParseError {
    match tok {
        Tok::End => ParseError { kind: ParseErrorKind::UnexpectedEnd, pos },
        _ => {
            let c = lx.src[pos..].chars().next().unwrap_or(' ');
            ParseError { kind: ParseErrorKind::UnexpectedChar(c), pos }
        }
    }
}

fn hyper(lx: &mut Lexer<'_>, sig: &Signature) -> Result<HyperTerm, ParseError> {
    let (pos, tok) = lx.next()?;
    let Tok::Ident(name) = tok else {
        return Err(unexpected(lx, pos, &tok));
    };
    if let Some(i) = reserved_index(name, 'e', pos)? {
        if lx.peek()?.1 == Tok::Open {
            return Err(ParseError { kind: ParseErrorKind::ReservedApplied(name.into()), pos });
        }
        return Ok(HyperTerm::Designated(i));
    }
    let head = if sig.ops.contains(name) {
        Head::Op(name.into())
    } else if sig.generators.contains(name) {
        Head::Generator(name.into())
    } else {
        return Err(ParseError { kind: ParseErrorKind::UnknownSymbol(name.into()), pos });
    };
    let args = lx.args(|lx| hyper(lx, sig))?.unwrap_or_default();
    Ok(HyperTerm::Apply(head, args).canonicalize())
}

fn rho(lx: &mut Lexer<'_>, ty: &FinitaryType) -> Result<RhoTerm, ParseError> {
    let (pos, tok) = lx.next()?;
    let Tok::Ident(name) = tok else {
        return Err(unexpected(lx, pos, &tok));
    };
    if let Some(i) = reserved_index(name, 'v', pos)? {
        if lx.peek()?.1 == Tok::Open {
            return Err(ParseError { kind: ParseErrorKind::ReservedApplied(name.into()), pos });
        }
        return Ok(RhoTerm::Var(i));
    }
    let Some(n) = ty.arity(name) else {
        return Err(ParseError { kind: ParseErrorKind::UnknownSymbol(name.into()), pos });
    };
    let children = lx.args(|lx| rho(lx, ty))?.unwrap_or_default();
    if children.len() != n {
        return Err(ParseError {
            kind: ParseErrorKind::ArityMismatch { symbol: name.into(), expected: n, found: children.len() },
            pos,
        });
    }
    Ok(RhoTerm::Node(name.into(), children))
}

pub fn parse_hyperterm(text: &str, sig: &Signature) -> Result<HyperTerm, ParseError> {
    parse_hyperterm_at(text, 0, sig)
}

fn parse_hyperterm_at(text: &str, offset: usize, sig: &Signature) -> Result<HyperTerm, ParseError> {
    let mut lx = Lexer::new(text, offset);
    let t = hyper(&mut lx, sig)?;
    lx.expect_end()?;
    Ok(t)
}

pub fn parse_rho_term(text: &str, ty: &FinitaryType) -> Result<RhoTerm, ParseError> {
    let mut lx = Lexer::new(text, 0);
    let t = rho(&mut lx, ty)?;
    lx.expect_end()?;
    Ok(t)
}

fn split_eq(text: &str) -> Result<usize, ParseError> {
    text.find('=').ok_or(ParseError { kind: ParseErrorKind::MissingEquals, pos: text.len() })
}

pub fn parse_identity(text: &str, sig: &Signature) -> Result<Identity, ParseError> {
    let eq = split_eq(text)?;
    let lhs = {
        let mut lx = Lexer::new(&text[..eq], 0);
        let t = hyper(&mut lx, sig)?;
        lx.expect_end()?;
        t
    };
    let rhs = parse_hyperterm_at(text, eq + 1, sig)?;
    Ok(Identity { lhs, rhs })
}

pub fn parse_rho_identity(text: &str, ty: &FinitaryType) -> Result<RhoIdentity, ParseError> {
    let eq = split_eq(text)?;
    let mut lx = Lexer::new(&text[..eq], 0);
    let lhs = rho(&mut lx, ty)?;
    lx.expect_end()?;
    let mut lx = Lexer::new(text, eq + 1);
    let rhs = rho(&mut lx, ty)?;
    lx.expect_end()?;
    Ok(RhoIdentity { lhs, rhs })
}

/// Identifiers in `text` other than the reserved `e<i>`/`v<i>` tokens, in
/// order of first appearance. Used to infer a signature from input text.
pub fn scan_identifiers(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find(|c: char| c.is_ascii_alphabetic() || c == '_') {
        let tail = &rest[start..];
        let len = tail
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(tail.len());
        let name = &tail[..len];
        if !symbol_is_reserved(name) && !out.iter().any(|x| x == name) {
            out.push(name.into());
        }
        rest = &tail[len..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn sig() -> Signature {
        Signature::new(["s", "c"], ["x", "y"])
    }

    #[test]
    fn parses_designated() {
        assert_eq!(parse_hyperterm("e3", &sig()).unwrap(), HyperTerm::Designated(3));
        assert_eq!(parse_hyperterm("  e12 ", &sig()).unwrap(), HyperTerm::Designated(12));
    }

    #[test]
    fn parses_and_trims() {
        let t = parse_hyperterm("s(e1,e2)", &sig()).unwrap();
        assert_eq!(t, HyperTerm::Apply(Head::Op("s".into()), vec![]));
        let t = parse_hyperterm("s(e1, e2, e3)", &sig()).unwrap();
        assert_eq!(t, HyperTerm::Apply(Head::Op("s".into()), vec![]));
        let t = parse_hyperterm("s(e2,e1)", &sig()).unwrap();
        assert_eq!(t.to_string(), "s(e2,e1)");
        let t = parse_hyperterm("x(s, c(e2))", &sig()).unwrap();
        assert_eq!(t.to_string(), "x(s,c(e2))");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_hyperterm("s(e1,q)", &sig()).unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::UnknownSymbol("q".into()), pos: 5 });
        let err = parse_hyperterm("e2(e1)", &sig()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ReservedApplied("e2".into()));
        let err = parse_hyperterm("e0", &sig()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ZeroIndex);
        let err = parse_hyperterm("s(e1", &sig()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        let err = parse_hyperterm("s e1", &sig()).unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::TrailingInput, pos: 2 });
        let err = parse_hyperterm("s()", &sig()).unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::UnexpectedChar(')'), pos: 2 });
        let err = parse_hyperterm("s(e1;e2)", &sig()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar(';'));
    }

    #[test]
    fn rho_terms_check_arity() {
        let ty = FinitaryType::from_pairs([("s", 2), ("c", 0)]);
        let p = parse_rho_term("s(v2, s(c, v1))", &ty).unwrap();
        assert_eq!(p.to_string(), "s(v2,s(c,v1))");
        let err = parse_rho_term("s(v1)", &ty).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityMismatch { expected: 2, found: 1, .. }));
        assert!(parse_rho_term("e1", &ty).is_err());
    }

    #[test]
    fn identities() {
        let id = parse_identity("s(e1,e2) = s(e2,e1)", &sig()).unwrap();
        assert_eq!(id.to_string(), "s = s(e2,e1)");
        let err = parse_identity("s = s(e2,q)", &sig()).unwrap_err();
        assert_eq!(err.pos, 9);
        assert_eq!(parse_identity("s", &sig()).unwrap_err().kind, ParseErrorKind::MissingEquals);
        let ty = FinitaryType::from_pairs([("s", 2)]);
        let id = parse_rho_identity("s(v1,v2)=s(v2,v1)", &ty).unwrap();
        assert_eq!(id.to_string(), "s(v1,v2) = s(v2,v1)");
    }

    #[test]
    fn scans_identifiers() {
        assert_eq!(scan_identifiers("x(s(e1,e2), c) = s"), vec!["x", "s", "c"]);
    }
}

use super::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Dot,
    Dash,
    Arrow,
    Bowtie,
    Star,
    Bars,
    Eq,
    Prime,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "name",
            Tok::Int(_) => "integer",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Dash => "-",
            Tok::Arrow => "->",
            Tok::Bowtie => "><",
            Tok::Star => "*",
            Tok::Bars => "||",
            Tok::Eq => "=",
            Tok::Prime => "'",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    macro_rules! bump {
        () => {{
            let c = chars.next();
            match c {
                Some('\n') => {
                    line += 1;
                    col = 1;
                }
                Some(_) => col += 1,
                None => {}
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let tok = match c {
            '/' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                    continue;
                }
                return Err(Diagnostic::syntax(pos, "stray `/`", vec!["`//`".into()]));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() => {
                let mut value: u64 = 0;
                let mut overflow = false;
                while let Some(&c) = chars.peek() {
                    let Some(d) = c.to_digit(10) else { break };
                    bump!();
                    match value
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(u64::from(d)))
                    {
                        Some(v) => value = v,
                        None => overflow = true,
                    }
                }
                if overflow {
                    return Err(Diagnostic::syntax(pos, "integer literal too large", vec![]));
                }
                Tok::Int(value)
            }
            _ => {
                bump!();
                match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '*' => Tok::Star,
                    '=' => Tok::Eq,
                    '\'' => Tok::Prime,
                    '⋈' => Tok::Bowtie,
                    '∥' => Tok::Bars,
                    '-' => {
                        if chars.peek() == Some(&'>') {
                            bump!();
                            Tok::Arrow
                        } else {
                            Tok::Dash
                        }
                    }
                    '>' if chars.peek() == Some(&'<') => {
                        bump!();
                        Tok::Bowtie
                    }
                    '|' if chars.peek() == Some(&'|') => {
                        bump!();
                        Tok::Bars
                    }
                    other => {
                        return Err(Diagnostic::syntax(
                            pos,
                            format!("unexpected character `{}`", other.escape_default()),
                            vec![],
                        ))
                    }
                }
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_aliases() {
        assert_eq!(
            toks("a >< b ⋈ c || d ∥ e -> - -1"),
            vec![
                Tok::Ident("a".into()),
                Tok::Bowtie,
                Tok::Ident("b".into()),
                Tok::Bowtie,
                Tok::Ident("c".into()),
                Tok::Bars,
                Tok::Ident("d".into()),
                Tok::Bars,
                Tok::Ident("e".into()),
                Tok::Arrow,
                Tok::Dash,
                Tok::Dash,
                Tok::Int(1),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = lex("// hi\n  x // there\ny").unwrap();
        assert_eq!(t[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(t[1].pos, Pos { line: 3, col: 1 });
    }

    #[test]
    fn errors() {
        assert!(lex("99999999999999999999999").is_err());
        let e = lex("a\n  $").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(lex("a | b").is_err());
    }
}

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SExpr {
    Symbol(String, SourceSpan),
    List(Vec<SExpr>, SourceSpan),
}

impl SExpr {
    pub(crate) fn span(&self) -> &SourceSpan {
        match self {
            SExpr::Symbol(_, s) | SExpr::List(_, s) => s,
        }
    }

    pub(crate) fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub(crate) fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }
}

struct Reader<'a> {
    file: &'a str,
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Reader<'a> {
    fn span(&self, length: usize) -> SourceSpan {
        SourceSpan {
            file: self.file.to_string(),
            line: self.line,
            column: self.column,
            length,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<SExpr>, ParseError> {
        self.skip_trivia();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let start = self.span(1);
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(ParseError::syntax("unclosed `(`", start));
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List(items, start)));
                        }
                        Some(_) => {
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            ')' => Err(ParseError::syntax("unexpected `)`", start)),
            _ => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                let mut span = start;
                span.length = text.chars().count();
                Ok(Some(SExpr::Symbol(text.to_lowercase(), span)))
            }
        }
    }
}

/// Reads exactly one top-level expression; trailing content is an error.
pub(crate) fn read_one(file: &str, text: &str) -> Result<SExpr, ParseError> {
    let mut reader = Reader {
        file,
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let expr = reader
        .read()?
        .ok_or_else(|| ParseError::syntax("empty input", reader.span(0)))?;
    reader.skip_trivia();
    if reader.chars.peek().is_some() {
        return Err(ParseError::syntax(
            "trailing content after expression",
            reader.span(1),
        ));
    }
    Ok(expr)
}

//! Token stream for Java-style sources. Comments are split off into a side
//! list anchored at the index of the token that follows them.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Punct(char),
    Literal,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Comment {
    /// Number of tokens emitted before the comment.
    pub at: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub line: usize,
    pub message: &'static str,
}

pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

pub(crate) fn lex(src: &str) -> Result<Lexed, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let mut line = 1usize;
    let mut i = 0usize;

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '/' if next == Some('/') => {
                let start = i + 2;
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                comments.push(Comment {
                    at: tokens.len(),
                    text: chars[start..i].iter().collect(),
                });
            }
            '/' if next == Some('*') => {
                let start_line = line;
                let start = i + 2;
                i += 2;
                loop {
                    if i + 1 >= chars.len() {
                        return Err(LexError {
                            line: start_line,
                            message: "unterminated block comment",
                        });
                    }
                    if chars[i] == '*' && chars[i + 1] == '/' {
                        break;
                    }
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
                comments.push(Comment {
                    at: tokens.len(),
                    text: chars[start..i].iter().collect(),
                });
                i += 2;
            }
            '"' => {
                let start_line = line;
                let text_block = next == Some('"') && chars.get(i + 2) == Some(&'"');
                if text_block {
                    i += 3;
                    loop {
                        if i + 2 >= chars.len() {
                            return Err(LexError {
                                line: start_line,
                                message: "unterminated text block",
                            });
                        }
                        match chars[i] {
                            '\\' => i += 2,
                            '"' if chars[i + 1] == '"' && chars[i + 2] == '"' => {
                                i += 3;
                                break;
                            }
                            '\n' => {
                                line += 1;
                                i += 1;
                            }
                            _ => i += 1,
                        }
                    }
                } else {
                    i = skip_quoted(&chars, i, '"', start_line)?;
                }
                tokens.push(Token {
                    tok: Tok::Literal,
                    line: start_line,
                });
            }
            '\'' => {
                i = skip_quoted(&chars, i, '\'', line)?;
                tokens.push(Token {
                    tok: Tok::Literal,
                    line,
                });
            }
            c if c.is_ascii_digit() => {
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.')
                {
                    // `1..` never occurs in Java; a dot followed by a letter is a member access
                    if chars[i] == '.' && !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                        break;
                    }
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Literal,
                    line,
                });
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_part(chars[i]) {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                });
            }
            c => {
                tokens.push(Token {
                    tok: Tok::Punct(c),
                    line,
                });
                i += 1;
            }
        }
    }
    Ok(Lexed { tokens, comments })
}

fn skip_quoted(chars: &[char], mut i: usize, quote: char, line: usize) -> Result<usize, LexError> {
    i += 1;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            '\n' => break,
            c if c == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(LexError {
        line,
        message: "unterminated literal",
    })
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

//! Compact textual notation for trees, e.g. `->('a', X('b', tau), 'c')`.
//!
//! Operators are written `->`, `X`, `+`, `*` (or `→`, `×`, `∧`, `↺`).
//! Labels are single-quoted with backslash escapes, or bare words made of
//! anything except whitespace, parentheses, commas and quotes. The bare word
//! `tau` (or `τ`) is the silent leaf.

use std::str::FromStr;

use thiserror::Error;

use super::{Node, Operator, ProcessTree};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("tree notation error at offset {offset}: {message}")]
pub struct NotationError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, NotationError> {
        Err(NotationError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn node(&mut self) -> Result<Node, NotationError> {
        self.skip_ws();
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some('\'') => {
                self.pos += 1;
                let mut label = String::new();
                loop {
                    let Some(c) = self.peek() else {
                        return self.error("unterminated label");
                    };
                    self.pos += c.len_utf8();
                    match c {
                        '\'' => break,
                        '\\' => match self.peek() {
                            Some(escaped) => {
                                self.pos += escaped.len_utf8();
                                label.push(escaped);
                            }
                            None => return self.error("dangling escape"),
                        },
                        _ => label.push(c),
                    }
                }
                Ok(Node::Activity(label))
            }
            Some(_) => {
                let word_len = self
                    .rest()
                    .find(|c: char| c.is_whitespace() || "(),'".contains(c))
                    .unwrap_or(self.rest().len());
                let word = &self.rest()[..word_len];
                if word.is_empty() {
                    return self.error("expected a node");
                }
                let start = self.pos;
                self.pos += word_len;
                self.skip_ws();
                if self.peek() == Some('(') {
                    let op = match word {
                        "->" | "→" => Operator::Sequence,
                        "X" | "×" => Operator::Choice,
                        "+" | "∧" => Operator::Parallel,
                        "*" | "↺" => Operator::Loop,
                        _ => {
                            self.pos = start;
                            return self.error(format!("unknown operator `{word}`"));
                        }
                    };
                    self.pos += 1;
                    let mut children = Vec::new();
                    self.skip_ws();
                    if !self.eat(')') {
                        loop {
                            children.push(self.node()?);
                            self.skip_ws();
                            if self.eat(')') {
                                break;
                            }
                            if !self.eat(',') {
                                return self.error("expected `,` or `)`");
                            }
                        }
                    }
                    Ok(Node::Operator { op, children })
                } else if word == "tau" || word == "τ" {
                    Ok(Node::Tau)
                } else {
                    Ok(Node::Activity(word.to_string()))
                }
            }
        }
    }
}

impl FromStr for Node {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser { src: s, pos: 0 };
        let node = parser.node()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return parser.error("trailing input");
        }
        Ok(node)
    }
}

impl FromStr for ProcessTree {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(ProcessTree::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bare_and_quoted() {
        let tree: Node = "->(a, X('Send Fine', tau), c)".parse().unwrap();
        assert_eq!(
            tree,
            Node::sequence(vec![
                Node::activity("a"),
                Node::choice(vec![Node::activity("Send Fine"), Node::Tau]),
                Node::activity("c"),
            ])
        );
    }

    #[test]
    fn unicode_symbols() {
        let a: Node = "→(a, ×(b, τ), ∧(c, ↺(d, e)))".parse().unwrap();
        let b: Node = "->(a, X(b, tau), +(c, *(d, e)))".parse().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn display_round_trips_escapes() {
        let node = Node::sequence(vec![Node::activity("it's"), Node::activity("a\\b"), Node::operator(Operator::Parallel, vec![])]);
        let text = node.to_string();
        assert_eq!(text, r"->('it\'s', 'a\\b', +())");
        assert_eq!(text.parse::<Node>().unwrap(), node);
    }

    #[test]
    fn errors() {
        assert!("->(a, b".parse::<Node>().is_err());
        assert!("foo(a)".parse::<Node>().is_err());
        assert!("a b".parse::<Node>().is_err());
        assert!("'abc".parse::<Node>().is_err());
        assert!("".parse::<Node>().is_err());
    }
}

//! Parser and serializer for the OpenQASM 2.0 subset used by the toolkit:
//! `qreg`/`creg` declarations, the gates `x h cx ccx swap`, `barrier`,
//! `measure`, and line comments. Two magic comments are recognised:
//!
//! * `// CONST q[i] = b` declares qubit `q[i]` as a constant initialised to `b`.
//! * `// DUMMY <id>` trailing a `swap` statement on the same line marks it as
//!   an inserted dummy gate. Markers are only written when explicitly requested.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind, QubitId, Register};
use crate::error::QasmError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Real(String),
    Str(String),
    Punct(char),
    Arrow,
    Comment(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            push(&mut out, Tok::Comment(chars[start..end].iter().collect()));
            col += end - i;
            i = end;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            push(&mut out, Tok::Arrow);
            i += 2;
            col += 2;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if s.contains('.') {
                Tok::Real(s)
            } else {
                Tok::Int(s.parse().map_err(|_| QasmError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("integer literal `{s}` too large"),
                })?)
            };
            push(&mut out, tok);
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut end = start;
            while end < chars.len() && chars[end] != '"' && chars[end] != '\n' {
                end += 1;
            }
            if chars.get(end) != Some(&'"') {
                return Err(QasmError::Syntax { line: tl, col: tc, msg: "unterminated string".into() });
            }
            push(&mut out, Tok::Str(chars[start..end].iter().collect()));
            col += end + 1 - i;
            i = end + 1;
            continue;
        }
        if ";,[](){}".contains(c) {
            push(&mut out, Tok::Punct(c));
            i += 1;
            col += 1;
            continue;
        }
        return Err(QasmError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

/// Operand reference: a whole register or one element of it.
struct Arg {
    reg: String,
    index: Option<usize>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    circuit: Circuit,
    consts: Vec<(String, usize, bool, usize, usize)>,
    eof_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or((self.eof_line, 1))
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(QasmError::Syntax { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, p: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Punct(c), .. }) if *c == p => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = describe(&t.tok);
                self.syntax(format!("expected `{p}`, found {found}"))
            }
            None => self.syntax(format!("expected `{p}`, found end of input")),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize), QasmError> {
        match self.next() {
            Some(Token { tok: Tok::Ident(s), line, col }) => Ok((s, line, col)),
            Some(t) => {
                self.pos -= 1;
                self.syntax(format!("expected identifier, found {}", describe(&t.tok)))
            }
            None => self.syntax("expected identifier, found end of input"),
        }
    }

    fn expect_int(&mut self) -> Result<usize, QasmError> {
        match self.next() {
            Some(Token { tok: Tok::Int(n), .. }) => Ok(n),
            Some(t) => {
                self.pos -= 1;
                self.syntax(format!("expected integer, found {}", describe(&t.tok)))
            }
            None => self.syntax("expected integer, found end of input"),
        }
    }

    fn parse_arg(&mut self) -> Result<Arg, QasmError> {
        let (reg, line, col) = self.expect_ident()?;
        let index = if matches!(self.peek(), Some(Token { tok: Tok::Punct('['), .. })) {
            self.pos += 1;
            let n = self.expect_int()?;
            self.expect_punct(']')?;
            Some(n)
        } else {
            None
        };
        Ok(Arg { reg, index, line, col })
    }

    fn parse_args(&mut self) -> Result<Vec<Arg>, QasmError> {
        let mut args = vec![self.parse_arg()?];
        while matches!(self.peek(), Some(Token { tok: Tok::Punct(','), .. })) {
            self.pos += 1;
            args.push(self.parse_arg()?);
        }
        Ok(args)
    }

    fn resolve(regs: &[Register], arg: &Arg) -> Result<Vec<usize>, QasmError> {
        let reg = regs.iter().find(|r| r.name == arg.reg).ok_or_else(|| QasmError::UnknownRegister {
            name: arg.reg.clone(),
            line: arg.line,
            col: arg.col,
        })?;
        match arg.index {
            Some(i) if i >= reg.size => Err(QasmError::IndexOutOfRange {
                register: reg.name.clone(),
                index: i,
                size: reg.size,
                line: arg.line,
                col: arg.col,
            }),
            Some(i) => Ok(vec![reg.offset + i]),
            None => Ok((reg.offset..reg.offset + reg.size).collect()),
        }
    }

    fn declare(&mut self, quantum: bool) -> Result<(), QasmError> {
        let (name, line, col) = self.expect_ident()?;
        self.expect_punct('[')?;
        let size = self.expect_int()?;
        self.expect_punct(']')?;
        self.expect_punct(';')?;
        let c = &mut self.circuit;
        if c.qregs.iter().chain(c.cregs.iter()).any(|r| r.name == name) {
            return Err(QasmError::DuplicateRegister { name, line, col });
        }
        if quantum {
            c.qregs.push(Register { name, offset: c.num_qubits, size });
            c.num_qubits += size;
        } else {
            c.cregs.push(Register { name, offset: c.num_clbits, size });
            c.num_clbits += size;
        }
        Ok(())
    }

    fn push_gate(&mut self, gate: Gate, line: usize, col: usize) -> Result<(), QasmError> {
        self.circuit.push(gate).map_err(|source| QasmError::Invalid { line, col, source })
    }

    /// Handles a comment token. `last_stmt_line` is the line on which the
    /// previous statement ended, used to bind `DUMMY` markers.
    fn comment(&mut self, text: &str, line: usize, col: usize, last_stmt_line: Option<usize>) -> Result<(), QasmError> {
        let body = text.trim();
        if let Some(rest) = body.strip_prefix("CONST") {
            if !rest.starts_with(char::is_whitespace) {
                return Ok(());
            }
            let bad = || QasmError::Syntax {
                line,
                col,
                msg: format!("malformed CONST pragma `{body}`; expected `CONST reg[i] = 0|1`"),
            };
            let (lhs, rhs) = rest.split_once('=').ok_or_else(bad)?;
            let lhs = lhs.trim();
            let (reg, idx) = lhs.strip_suffix(']').and_then(|s| s.split_once('[')).ok_or_else(bad)?;
            let idx: usize = idx.trim().parse().map_err(|_| bad())?;
            let value = match rhs.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            self.consts.push((reg.trim().to_string(), idx, value, line, col));
        } else if let Some(rest) = body.strip_prefix("DUMMY") {
            let id = rest.trim();
            if id.is_empty() || !rest.starts_with(char::is_whitespace) {
                return Ok(());
            }
            if last_stmt_line == Some(line) {
                if let Some(g) = self.circuit.gates.last_mut() {
                    if g.kind == GateKind::Swap {
                        g.dummy_marker = Some(id.to_string());
                    }
                }
            }
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let (word, line, col) = self.expect_ident()?;
        match word.as_str() {
            "OPENQASM" => {
                match self.next() {
                    Some(Token { tok: Tok::Real(_) | Tok::Int(_), .. }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.syntax("expected version number after OPENQASM");
                    }
                }
                self.expect_punct(';')
            }
            "include" => {
                match self.next() {
                    Some(Token { tok: Tok::Str(_), .. }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.syntax("expected file name after include");
                    }
                }
                self.expect_punct(';')
            }
            "qreg" => self.declare(true),
            "creg" => self.declare(false),
            "measure" => {
                let src = self.parse_arg()?;
                match self.next() {
                    Some(Token { tok: Tok::Arrow, .. }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.syntax("expected `->` in measure");
                    }
                }
                let dst = self.parse_arg()?;
                self.expect_punct(';')?;
                let qs = Self::resolve(&self.circuit.qregs, &src)?;
                let cs = Self::resolve(&self.circuit.cregs, &dst)?;
                if qs.len() != cs.len() {
                    return Err(QasmError::Syntax {
                        line,
                        col,
                        msg: format!("measure operands differ in size ({} vs {})", qs.len(), cs.len()),
                    });
                }
                for (q, c) in qs.into_iter().zip(cs) {
                    self.push_gate(Gate::measure(q, c), line, col)?;
                }
                Ok(())
            }
            "barrier" => {
                let args = self.parse_args()?;
                self.expect_punct(';')?;
                let mut qs = Vec::new();
                for a in &args {
                    for q in Self::resolve(&self.circuit.qregs, a)? {
                        if !qs.contains(&q) {
                            qs.push(q);
                        }
                    }
                }
                self.push_gate(Gate::barrier(&qs), line, col)
            }
            "gate" | "opaque" | "if" | "reset" => Err(QasmError::Syntax {
                line,
                col,
                msg: format!("`{word}` statements are not supported"),
            }),
            name => {
                let kind = match GateKind::from_qasm_name(name) {
                    Some(k) if k.is_unitary() => k,
                    _ => return Err(QasmError::UnsupportedGate { name: word, line, col }),
                };
                if matches!(self.peek(), Some(Token { tok: Tok::Punct('('), .. })) {
                    return self.syntax(format!("`{name}` takes no parameters"));
                }
                let args = self.parse_args()?;
                self.expect_punct(';')?;
                let mut qubits = Vec::with_capacity(args.len());
                for a in &args {
                    if a.index.is_none() {
                        return Err(QasmError::Syntax {
                            line: a.line,
                            col: a.col,
                            msg: format!("register broadcast `{}` is not supported for {name}", a.reg),
                        });
                    }
                    qubits.push(QubitId(Self::resolve(&self.circuit.qregs, a)?[0]));
                }
                let gate = Gate { kind, qubits, clbit: None, dummy_marker: None };
                self.push_gate(gate, line, col)
            }
        }
    }

    fn run(mut self) -> Result<Circuit, QasmError> {
        let mut last_stmt_line = None;
        while let Some(t) = self.peek().cloned() {
            if let Tok::Comment(text) = &t.tok {
                self.pos += 1;
                self.comment(text, t.line, t.col, last_stmt_line)?;
                continue;
            }
            self.statement()?;
            last_stmt_line = self.toks.get(self.pos - 1).map(|t| t.line);
        }
        for (reg, idx, value, line, col) in std::mem::take(&mut self.consts) {
            let arg = Arg { reg, index: Some(idx), line, col };
            let q = Self::resolve(&self.circuit.qregs, &arg)?[0];
            self.circuit
                .set_constant(q, value)
                .map_err(|source| QasmError::Invalid { line, col, source })?;
        }
        Ok(self.circuit)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Real(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Punct(c) => format!("`{c}`"),
        Tok::Arrow => "`->`".into(),
        Tok::Comment(_) => "comment".into(),
    }
}

/// Parses QASM text. Registers are flattened in declaration order.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    let eof_line = text.lines().count().max(1);
    let circuit = Circuit {
        num_qubits: 0,
        num_clbits: 0,
        qregs: Vec::new(),
        cregs: Vec::new(),
        gates: Vec::new(),
        constant_qubits: Default::default(),
    };
    Parser { toks, pos: 0, circuit, consts: Vec::new(), eof_line }.run()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SerializeOptions {
    /// Emit `// DUMMY <id>` after marked swaps. Off by default so that
    /// obfuscated output carries no marker.
    pub include_markers: bool,
}

fn operand(regs: &[Register], index: usize) -> String {
    regs.iter()
        .find(|r| index >= r.offset && index < r.offset + r.size)
        .map(|r| format!("{}[{}]", r.name, index - r.offset))
        // Circuits built in code without a register table fall back to `q`.
        .unwrap_or_else(|| format!("q[{index}]"))
}

pub fn serialize_qasm(circuit: &Circuit) -> String {
    serialize_qasm_with(circuit, SerializeOptions::default())
}

pub fn serialize_qasm_with(circuit: &Circuit, opts: SerializeOptions) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for r in &circuit.qregs {
        let _ = writeln!(out, "qreg {}[{}];", r.name, r.size);
    }
    for r in &circuit.cregs {
        let _ = writeln!(out, "creg {}[{}];", r.name, r.size);
    }
    for (q, v) in &circuit.constant_qubits {
        let _ = writeln!(out, "// CONST {} = {}", operand(&circuit.qregs, q.0), u8::from(*v));
    }
    for g in &circuit.gates {
        let qs: Vec<String> = g.qubits.iter().map(|q| operand(&circuit.qregs, q.0)).collect();
        match g.kind {
            GateKind::Measure => {
                let c = operand(&circuit.cregs, g.clbit.unwrap_or_default());
                let _ = write!(out, "measure {} -> {c};", qs[0]);
            }
            kind => {
                let _ = write!(out, "{} {};", kind.qasm_name(), qs.join(","));
            }
        }
        if let (true, Some(m)) = (opts.include_markers, &g.dummy_marker) {
            let _ = write!(out, " // DUMMY {m}");
        }
        out.push('\n');
    }
    out
}

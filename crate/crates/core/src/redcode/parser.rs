//! Two-pass Redcode assembler.
//!
//! Pass one tokenizes every line, records labels, `EQU` definitions and
//! instruction statements with unevaluated operand expressions. Pass two
//! evaluates expressions (labels become offsets relative to the referencing
//! instruction), applies default modifiers and reduces numbers modulo the
//! core size.

use std::collections::HashMap;

use thiserror::Error;

use super::types::{default_modifier, AddressingMode, Field, Instruction, Modifier, Opcode, Warrior};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown opcode `{0}`")]
    UnknownOpcode(String),
    #[error("unknown modifier `{0}`")]
    UnknownModifier(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("program has {len} instructions, limit is {max}")]
    TooLong { len: usize, max: usize },
    #[error("no instructions")]
    NoInstructions,
    #[error("malformed field: {0}")]
    MalformedField(String),
    #[error("start offset {start} outside program of length {len}")]
    StartOutOfRange { start: i64, len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based source line.
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }
}

/// Assembler settings.
#[derive(Clone, Debug)]
pub struct AsmOptions {
    pub core_size: u32,
    pub max_length: usize,
    /// Used when the source has no `;name` comment.
    pub default_name: String,
}

impl AsmOptions {
    pub fn new(core_size: u32, max_length: usize) -> Self {
        AsmOptions { core_size, max_length, default_name: String::new() }
    }

    pub fn with_default_name(mut self, name: impl Into<String>) -> Self {
        self.default_name = name.into();
        self
    }
}

/// Assemble `source` for a core of `core_size` cells with at most
/// `max_length` instructions.
pub fn parse(source: &str, core_size: u32, max_length: usize) -> Result<Warrior, ParseError> {
    parse_with(source, &AsmOptions::new(core_size, max_length))
}

pub fn parse_with(source: &str, opts: &AsmOptions) -> Result<Warrior, ParseError> {
    assert!(opts.core_size > 0, "core size must be positive");
    let program = first_pass(source)?;
    second_pass(source, program, opts)
}

/// True when `line` is, on its own, a syntactically valid instruction or
/// directive. Labels are not resolved. Used to pick Redcode out of free text.
pub fn is_statement(line: &str) -> bool {
    let code = strip_comment(line);
    let Ok(tokens) = tokenize(code) else {
        return false;
    };
    if tokens.is_empty() {
        return false;
    }
    let mut scratch = Program::default();
    match parse_statement(&tokens, 1, &mut scratch, &mut Vec::new()) {
        Ok(Statement::LabelsOnly) | Err(_) => false,
        Ok(_) => {
            // Operand expressions must at least be well formed.
            scratch.instrs.iter().all(|s| [&s.a, &s.b].into_iter().flatten().all(|op| expr_syntax_ok(&op.expr)))
                && scratch.start_expr.as_ref().is_none_or(|(e, _)| expr_syntax_ok(e))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Number(i64),
    Punct(char),
}

fn strip_comment(line: &str) -> &str {
    match line.find(';') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokenize(code: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let mut chars = code.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token::Ident(code[i..end].to_string()));
        } else if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_digit() {
                    end = j + 1;
                    chars.next();
                } else {
                    break;
                }
            }
            let digits = &code[i..end];
            let n = digits.parse::<i64>().map_err(|_| format!("number `{digits}` out of range"))?;
            out.push(Token::Number(n));
        } else if ",.#$*@{<}>+-/():".contains(c) {
            out.push(Token::Punct(c));
            chars.next();
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Directive {
    Org,
    End,
    Equ,
}

fn directive(s: &str) -> Option<Directive> {
    match s.to_ascii_uppercase().as_str() {
        "ORG" => Some(Directive::Org),
        "END" => Some(Directive::End),
        "EQU" => Some(Directive::Equ),
        _ => None,
    }
}

fn is_keyword(s: &str) -> bool {
    Opcode::from_mnemonic(s).is_some() || directive(s).is_some()
}

#[derive(Clone, Debug)]
struct Operand {
    mode: Option<AddressingMode>,
    expr: Vec<Token>,
}

#[derive(Clone, Debug)]
struct InstrStmt {
    line: usize,
    opcode: Opcode,
    modifier: Option<Modifier>,
    a: Option<Operand>,
    b: Option<Operand>,
}

#[derive(Default)]
struct Program {
    name: Option<String>,
    instrs: Vec<InstrStmt>,
    labels: HashMap<String, (usize, usize)>,
    equs: HashMap<String, (Vec<Token>, usize)>,
    start_expr: Option<(Vec<Token>, usize)>,
    end_expr: Option<(Vec<Token>, usize)>,
    last_line: usize,
}

enum Statement {
    LabelsOnly,
    Instruction,
    Directive,
    End,
}

fn first_pass(source: &str) -> Result<Program, ParseError> {
    let mut program = Program::default();
    let mut pending_labels: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in source.split('\n').enumerate() {
        let line_no = idx + 1;
        program.last_line = line_no;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = raw.trim_start();
        if program.name.is_none() {
            if let Some(rest) = trimmed.strip_prefix(';') {
                let rest = rest.trim_start();
                if rest.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("name")) {
                    let after = &rest[4..];
                    if after.is_empty() || after.starts_with(char::is_whitespace) {
                        program.name = Some(after.trim().to_string());
                    }
                }
            }
        }
        let tokens =
            tokenize(strip_comment(raw)).map_err(|m| ParseError::new(line_no, ParseErrorKind::MalformedField(m)))?;
        if tokens.is_empty() {
            continue;
        }
        if let Statement::End = parse_statement(&tokens, line_no, &mut program, &mut pending_labels)? {
            break;
        }
    }
    let end_addr = program.instrs.len();
    for (label, line) in pending_labels {
        define_label(&mut program, label, end_addr, line)?;
    }
    Ok(program)
}

fn define_label(program: &mut Program, label: String, addr: usize, line: usize) -> Result<(), ParseError> {
    if program.labels.contains_key(&label) || program.equs.contains_key(&label) {
        return Err(ParseError::new(line, ParseErrorKind::DuplicateLabel(label)));
    }
    program.labels.insert(label, (addr, line));
    Ok(())
}

fn parse_statement(
    tokens: &[Token],
    line: usize,
    program: &mut Program,
    pending: &mut Vec<(String, usize)>,
) -> Result<Statement, ParseError> {
    let err = |kind| ParseError::new(line, kind);
    let mut pos = 0;
    let mut line_labels = Vec::new();
    let keyword = loop {
        match tokens.get(pos) {
            Some(Token::Ident(word)) if is_keyword(word) => break word.clone(),
            Some(Token::Ident(word)) => {
                if !is_label(word) {
                    return Err(err(ParseErrorKind::MalformedField(format!("bad label `{word}`"))));
                }
                line_labels.push(word.clone());
                pos += 1;
                if tokens.get(pos) == Some(&Token::Punct(':')) {
                    pos += 1;
                }
            }
            None => {
                pending.extend(line_labels.into_iter().map(|l| (l, line)));
                return Ok(Statement::LabelsOnly);
            }
            Some(_) => {
                return Err(match line_labels.pop() {
                    Some(word) => err(ParseErrorKind::UnknownOpcode(word)),
                    None => err(ParseErrorKind::MalformedField("expected an opcode".into())),
                })
            }
        }
    };
    pos += 1;
    let rest = &tokens[pos..];

    if let Some(dir) = directive(&keyword) {
        match dir {
            Directive::Equ => {
                if line_labels.is_empty() {
                    return Err(err(ParseErrorKind::MalformedField("EQU without a label".into())));
                }
                if rest.is_empty() {
                    return Err(err(ParseErrorKind::MalformedField("EQU without a value".into())));
                }
                for label in line_labels {
                    if program.labels.contains_key(&label) || program.equs.contains_key(&label) {
                        return Err(err(ParseErrorKind::DuplicateLabel(label)));
                    }
                    program.equs.insert(label, (rest.to_vec(), line));
                }
                return Ok(Statement::Directive);
            }
            Directive::Org | Directive::End => {
                let addr = program.instrs.len();
                for label in pending.drain(..).chain(line_labels.into_iter().map(|l| (l, line))) {
                    define_label(program, label.0, addr, label.1)?;
                }
                if dir == Directive::Org {
                    if rest.is_empty() {
                        return Err(err(ParseErrorKind::MalformedField("ORG without a value".into())));
                    }
                    program.start_expr = Some((rest.to_vec(), line));
                    return Ok(Statement::Directive);
                }
                if !rest.is_empty() {
                    program.end_expr = Some((rest.to_vec(), line));
                }
                return Ok(Statement::End);
            }
        }
    }

    let opcode = Opcode::from_mnemonic(&keyword).expect("keyword is an opcode");
    let mut rest = rest;
    let mut modifier = None;
    if rest.first() == Some(&Token::Punct('.')) {
        match rest.get(1) {
            Some(Token::Ident(m)) => {
                modifier = Some(Modifier::parse(m).ok_or_else(|| err(ParseErrorKind::UnknownModifier(m.clone())))?);
                rest = &rest[2..];
            }
            _ => return Err(err(ParseErrorKind::UnknownModifier(String::new()))),
        }
    }

    let mut operands = Vec::new();
    if !rest.is_empty() {
        let mut depth = 0i32;
        let mut current = Vec::new();
        for tok in rest {
            match tok {
                Token::Punct('(') => depth += 1,
                Token::Punct(')') => depth -= 1,
                _ => {}
            }
            if *tok == Token::Punct(',') && depth == 0 {
                operands.push(std::mem::take(&mut current));
            } else {
                current.push(tok.clone());
            }
        }
        operands.push(current);
    }
    if operands.len() > 2 {
        return Err(err(ParseErrorKind::MalformedField("more than two operands".into())));
    }
    let mut parsed = operands.into_iter().map(|toks| parse_operand(toks, line));
    let a = parsed.next().transpose()?;
    let b = parsed.next().transpose()?;
    if a.is_none() && !matches!(opcode, Opcode::Dat | Opcode::Nop) {
        return Err(err(ParseErrorKind::MalformedField(format!("{opcode} needs an operand"))));
    }

    let addr = program.instrs.len();
    for label in pending.drain(..).chain(line_labels.into_iter().map(|l| (l, line))) {
        define_label(program, label.0, addr, label.1)?;
    }
    program.instrs.push(InstrStmt { line, opcode, modifier, a, b });
    Ok(Statement::Instruction)
}

fn parse_operand(mut tokens: Vec<Token>, line: usize) -> Result<Operand, ParseError> {
    let mut mode = None;
    if let Some(Token::Punct(c)) = tokens.first() {
        if let Some(m) = AddressingMode::from_symbol(*c) {
            mode = Some(m);
            tokens.remove(0);
        }
    }
    if tokens.is_empty() {
        return Err(ParseError::new(line, ParseErrorKind::MalformedField("empty operand".into())));
    }
    Ok(Operand { mode, expr: tokens })
}

struct Resolver<'a> {
    program: &'a Program,
    line: usize,
    current: i64,
    expanding: Vec<String>,
}

impl Resolver<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, ParseErrorKind::MalformedField(msg.into()))
    }

    fn eval(&mut self, tokens: &[Token]) -> Result<i64, ParseError> {
        let mut pos = 0;
        let value = self.expr(tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(self.err("trailing tokens in expression"));
        }
        Ok(value)
    }

    fn expr(&mut self, t: &[Token], pos: &mut usize) -> Result<i64, ParseError> {
        let mut acc = self.term(t, pos)?;
        while let Some(Token::Punct(op @ ('+' | '-'))) = t.get(*pos) {
            *pos += 1;
            let rhs = self.term(t, pos)?;
            acc = if *op == '+' { acc.checked_add(rhs) } else { acc.checked_sub(rhs) }
                .ok_or_else(|| self.err("arithmetic overflow"))?;
        }
        Ok(acc)
    }

    fn term(&mut self, t: &[Token], pos: &mut usize) -> Result<i64, ParseError> {
        let mut acc = self.unary(t, pos)?;
        while let Some(Token::Punct(op @ ('*' | '/'))) = t.get(*pos) {
            *pos += 1;
            let rhs = self.unary(t, pos)?;
            acc = if *op == '*' {
                acc.checked_mul(rhs).ok_or_else(|| self.err("arithmetic overflow"))?
            } else {
                if rhs == 0 {
                    return Err(self.err("division by zero"));
                }
                acc.checked_div(rhs).ok_or_else(|| self.err("arithmetic overflow"))?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self, t: &[Token], pos: &mut usize) -> Result<i64, ParseError> {
        match t.get(*pos) {
            Some(Token::Punct('-')) => {
                *pos += 1;
                let v = self.unary(t, pos)?;
                v.checked_neg().ok_or_else(|| self.err("arithmetic overflow"))
            }
            Some(Token::Punct('+')) => {
                *pos += 1;
                self.unary(t, pos)
            }
            _ => self.primary(t, pos),
        }
    }

    fn primary(&mut self, t: &[Token], pos: &mut usize) -> Result<i64, ParseError> {
        match t.get(*pos) {
            Some(Token::Number(n)) => {
                *pos += 1;
                Ok(*n)
            }
            Some(Token::Punct('(')) => {
                *pos += 1;
                let v = self.expr(t, pos)?;
                if t.get(*pos) != Some(&Token::Punct(')')) {
                    return Err(self.err("unbalanced parentheses"));
                }
                *pos += 1;
                Ok(v)
            }
            Some(Token::Ident(name)) => {
                *pos += 1;
                self.symbol(name)
            }
            Some(tok) => Err(self.err(format!("unexpected {tok:?} in expression"))),
            None => Err(self.err("incomplete expression")),
        }
    }

    fn symbol(&mut self, name: &str) -> Result<i64, ParseError> {
        if let Some(&(addr, _)) = self.program.labels.get(name) {
            return Ok(addr as i64 - self.current);
        }
        if let Some((tokens, _)) = self.program.equs.get(name) {
            if self.expanding.iter().any(|n| n == name) {
                return Err(self.err(format!("recursive EQU `{name}`")));
            }
            self.expanding.push(name.to_string());
            let v = self.eval(tokens);
            self.expanding.pop();
            return v;
        }
        Err(ParseError::new(self.line, ParseErrorKind::UnknownLabel(name.to_string())))
    }
}

fn expr_syntax_ok(tokens: &[Token]) -> bool {
    // Evaluate against a program where every identifier resolves to zero.
    fn walk(t: &[Token], pos: &mut usize, depth: usize) -> bool {
        if depth > 64 {
            return false;
        }
        loop {
            while matches!(t.get(*pos), Some(Token::Punct('-' | '+'))) {
                *pos += 1;
            }
            match t.get(*pos) {
                Some(Token::Number(_) | Token::Ident(_)) => *pos += 1,
                Some(Token::Punct('(')) => {
                    *pos += 1;
                    if !walk(t, pos, depth + 1) || t.get(*pos) != Some(&Token::Punct(')')) {
                        return false;
                    }
                    *pos += 1;
                }
                _ => return false,
            }
            match t.get(*pos) {
                Some(Token::Punct('+' | '-' | '*' | '/')) => *pos += 1,
                _ => return true,
            }
        }
    }
    let mut pos = 0;
    walk(tokens, &mut pos, 0) && pos == tokens.len()
}

fn second_pass(source: &str, program: Program, opts: &AsmOptions) -> Result<Warrior, ParseError> {
    if program.instrs.is_empty() {
        return Err(ParseError::new(program.last_line.max(1), ParseErrorKind::NoInstructions));
    }
    if program.instrs.len() > opts.max_length {
        let line = program.instrs[opts.max_length].line;
        return Err(ParseError::new(line, ParseErrorKind::TooLong { len: program.instrs.len(), max: opts.max_length }));
    }
    let core = opts.core_size as i64;
    let mut instructions = Vec::with_capacity(program.instrs.len());
    for (addr, stmt) in program.instrs.iter().enumerate() {
        let mut resolver = Resolver { program: &program, line: stmt.line, current: addr as i64, expanding: Vec::new() };
        let mut field = |op: &Option<Operand>| -> Result<Field, ParseError> {
            match op {
                None => Ok(Field::direct(0)),
                Some(op) => {
                    let v = resolver.eval(&op.expr)?;
                    Ok(Field::new(op.mode.unwrap_or(AddressingMode::Direct), v.rem_euclid(core) as u32))
                }
            }
        };
        let a = field(&stmt.a)?;
        let b = field(&stmt.b)?;
        let modifier = stmt.modifier.unwrap_or_else(|| default_modifier(stmt.opcode, a.mode, b.mode));
        instructions.push(Instruction::new(stmt.opcode, modifier, a, b));
    }

    let len = instructions.len();
    let start_spec = program.start_expr.as_ref().or(program.end_expr.as_ref());
    let start = match start_spec {
        None => 0,
        Some((tokens, line)) => {
            let mut resolver = Resolver { program: &program, line: *line, current: 0, expanding: Vec::new() };
            let s = resolver.eval(tokens)?;
            if s < 0 || s as usize >= len {
                return Err(ParseError::new(*line, ParseErrorKind::StartOutOfRange { start: s, len }));
            }
            s as usize
        }
    };

    Ok(Warrior {
        name: program.name.unwrap_or_else(|| opts.default_name.clone()),
        instructions,
        start,
        source: source.to_string(),
    })
}

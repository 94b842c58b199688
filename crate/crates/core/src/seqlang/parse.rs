use super::ast::*;
use crate::fockspace::{Mode, Spin};
use crate::protocols::Sampling;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug)]
struct Tok<'a> {
    text: &'a str,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Sequence {
        line,
        column,
        message: message.into(),
    }
}

/// Splits on whitespace, recording 1-based character columns.
fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (i, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                toks.push(Tok {
                    text: &line[b..i],
                    column: c,
                });
            }
        } else if start.is_none() {
            start = Some((i, col + 1));
        }
    }
    if let Some((b, c)) = start {
        toks.push(Tok {
            text: &line[b..],
            column: c,
        });
    }
    toks
}

/// Parses raw bytes; invalid UTF-8 is reported at the offending line.
pub fn parse_bytes(bytes: &[u8]) -> Result<Program> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
            let column = good.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
            Err(err(line, column, "invalid UTF-8"))
        }
    }
}

/// Parses a sequence program. One instruction per line, `#` starts a
/// comment, `set key value...` lines form the header and must precede the
/// instructions.
pub fn parse(text: &str) -> Result<Program> {
    let mut program = Program::default();
    let mut seen_keys: Vec<&str> = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokenize(line);
        let Some(first) = toks.first() else { continue };
        if first.text.eq_ignore_ascii_case("set") {
            if !program.instructions.is_empty() {
                return Err(err(
                    line_no,
                    first.column,
                    "header lines must precede instructions",
                ));
            }
            parse_header(&mut program.header, &mut seen_keys, line_no, &toks)?;
            continue;
        }
        let ins = parse_instruction(line_no, &toks, program.declared_modes())?;
        program.instructions.push(Spanned::new(
            ins,
            Span {
                line: line_no,
                column: first.column,
            },
        ));
    }
    validate(&program)?;
    Ok(program)
}

const HEADER_KEYS: [&str; 7] = [
    "cutoffs",
    "xi",
    "noise",
    "sampling",
    "shots",
    "seed",
    "echo_dephasing",
];

fn parse_header<'a>(
    header: &mut Header,
    seen: &mut Vec<&'a str>,
    line: usize,
    toks: &[Tok<'a>],
) -> Result<()> {
    let Some(key_tok) = toks.get(1) else {
        return Err(err(line, toks[0].column, "set needs a key"));
    };
    let key = HEADER_KEYS
        .iter()
        .find(|k| k.eq_ignore_ascii_case(key_tok.text))
        .ok_or_else(|| {
            err(
                line,
                key_tok.column,
                format!("unknown header key {}", key_tok.text),
            )
        })?;
    if seen.contains(key) {
        return Err(err(
            line,
            key_tok.column,
            format!("duplicate header key {key}"),
        ));
    }
    seen.push(key);
    let values = &toks[2..];
    let single = || -> Result<Tok<'a>> {
        match values {
            [v] => Ok(*v),
            _ => Err(err(
                line,
                key_tok.column,
                format!("set {key} expects 1 value, got {}", values.len()),
            )),
        }
    };
    match *key {
        "cutoffs" => {
            if values.is_empty() || values.len() > 3 {
                return Err(err(
                    line,
                    key_tok.column,
                    format!("set cutoffs expects 1 to 3 values, got {}", values.len()),
                ));
            }
            let mut cutoffs = Vec::new();
            for v in values {
                let c: usize = v
                    .text
                    .parse()
                    .map_err(|_| err(line, v.column, format!("malformed cutoff {}", v.text)))?;
                if c == 0 {
                    return Err(err(line, v.column, "cutoffs must be at least 1"));
                }
                cutoffs.push(c);
            }
            header.cutoffs = Some(cutoffs);
        }
        "xi" => {
            let v = single()?;
            let xi = number(line, v)?;
            if xi <= 0.0 {
                return Err(err(line, v.column, "xi must be positive"));
            }
            header.xi = Some(xi);
        }
        "noise" => header.noise = Some(single()?.text.to_string()),
        "sampling" => {
            let v = single()?;
            header.sampling = Some(match v.text.to_ascii_lowercase().as_str() {
                "exact" => Sampling::Exact,
                "sampled" => Sampling::Sampled,
                _ => {
                    return Err(err(
                        line,
                        v.column,
                        format!("sampling must be exact or sampled, got {}", v.text),
                    ))
                }
            });
        }
        "shots" => {
            let v = single()?;
            let shots: u64 = v
                .text
                .parse()
                .map_err(|_| err(line, v.column, format!("malformed shot count {}", v.text)))?;
            if shots == 0 {
                return Err(err(line, v.column, "shots must be at least 1"));
            }
            header.shots = Some(shots);
        }
        "seed" => {
            let v = single()?;
            header.seed = Some(
                v.text
                    .parse()
                    .map_err(|_| err(line, v.column, format!("malformed seed {}", v.text)))?,
            );
        }
        "echo_dephasing" => {
            let v = single()?;
            header.echo_dephasing = Some(match v.text.to_ascii_lowercase().as_str() {
                "on" | "true" => true,
                "off" | "false" => false,
                _ => {
                    return Err(err(
                        line,
                        v.column,
                        format!("echo_dephasing must be on or off, got {}", v.text),
                    ))
                }
            });
        }
        _ => unreachable!("key list and match arms agree"),
    }
    Ok(())
}

fn number(line: usize, tok: Tok<'_>) -> Result<f64> {
    parse_f64(tok.text)
        .ok_or_else(|| err(line, tok.column, format!("malformed number {}", tok.text)))
}

/// Finite decimal literal; rejects `inf`/`nan` spellings.
fn parse_f64(s: &str) -> Option<f64> {
    if s.is_empty()
        || !s
            .bytes()
            .all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b))
    {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

pub(crate) fn parse_angle(s: &str) -> Option<Angle> {
    let lower = s.to_ascii_lowercase();
    let Some(idx) = lower.find("pi") else {
        return parse_f64(s).map(Angle::Radians);
    };
    let (pre, post) = (&lower[..idx], &lower[idx + 2..]);
    let num: i64 = match pre {
        "" | "+" => 1,
        "-" => -1,
        p if p
            .bytes()
            .enumerate()
            .all(|(i, b)| b.is_ascii_digit() || (i == 0 && (b == b'-' || b == b'+'))) =>
        {
            p.parse().ok()?
        }
        _ => return None,
    };
    let den: u64 = if post.is_empty() {
        1
    } else {
        let d = post.strip_prefix('/')?;
        if !d.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        d.parse().ok().filter(|&d| d >= 1)?
    };
    if num == 0 {
        return Some(Angle::Radians(0.0));
    }
    Some(Angle::PiFraction { num, den })
}

pub(crate) fn parse_duration(s: &str) -> Option<Duration> {
    let lower = s.to_ascii_lowercase();
    let d = if let Some(idx) = lower.find("tau") {
        let (pre, post) = (&lower[..idx], &lower[idx + 3..]);
        let mut k = if pre.is_empty() { 1.0 } else { parse_f64(pre)? };
        if let Some(div) = post.strip_prefix('/') {
            let q = parse_f64(div).filter(|q| *q > 0.0)?;
            k /= q;
        } else if !post.is_empty() {
            return None;
        }
        Duration::Tau(k)
    } else if let Some(v) = lower.strip_suffix("us") {
        Duration::Seconds(parse_f64(v)? * 1e-6)
    } else if let Some(v) = lower.strip_suffix("ms") {
        Duration::Seconds(parse_f64(v)? * 1e-3)
    } else if let Some(v) = lower.strip_suffix('s') {
        Duration::Seconds(parse_f64(v)?)
    } else {
        Duration::Seconds(parse_f64(&lower)?)
    };
    let value = match d {
        Duration::Tau(k) => k,
        Duration::Seconds(t) => t,
    };
    (value.is_finite()).then_some(d)
}

fn parse_complex(s: &str) -> Option<C64> {
    match s.split_once(',') {
        Some((re, im)) => Some(C64::new(parse_f64(re)?, parse_f64(im)?)),
        None => Some(C64::new(parse_f64(s)?, 0.0)),
    }
}

fn parse_mode(s: &str) -> Option<Mode> {
    match s {
        "a" | "A" => Some(Mode::A),
        "b" | "B" => Some(Mode::B),
        "c" | "C" => Some(Mode::C),
        _ => None,
    }
}

fn parse_pair(s: &str) -> Option<(Mode, Mode)> {
    let mut chars = s.chars();
    let (p, q, rest) = (chars.next()?, chars.next()?, chars.next());
    if rest.is_some() {
        return None;
    }
    let p = parse_mode(&p.to_string())?;
    let q = parse_mode(&q.to_string())?;
    (p != q).then_some((p, q))
}

struct Args<'a, 'b> {
    line: usize,
    opcode: &'a Tok<'b>,
    rest: &'a [Tok<'b>],
}

impl<'a, 'b> Args<'a, 'b> {
    fn arity(&self, allowed: &[usize]) -> Result<()> {
        if allowed.contains(&self.rest.len()) {
            return Ok(());
        }
        let want = match allowed {
            [n] => format!("{n}"),
            _ => format!(
                "{} to {}",
                allowed.iter().min().unwrap_or(&0),
                allowed.iter().max().unwrap_or(&0)
            ),
        };
        Err(err(
            self.line,
            self.opcode.column,
            format!(
                "{} expects {want} argument(s), got {}",
                self.opcode.text.to_ascii_uppercase(),
                self.rest.len()
            ),
        ))
    }

    fn get<T>(&self, k: usize, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<T> {
        let tok = &self.rest[k];
        f(tok.text).ok_or_else(|| {
            err(
                self.line,
                tok.column,
                format!("malformed {what} {}", tok.text),
            )
        })
    }

    fn mode(&self, k: usize, declared: usize) -> Result<Mode> {
        let m = self.get(k, "mode", parse_mode)?;
        check_declared(self.line, self.rest[k].column, m, declared)?;
        Ok(m)
    }

    fn pair(&self, k: usize, declared: usize) -> Result<(Mode, Mode)> {
        if k >= self.rest.len() {
            if declared < 2 {
                return Err(err(self.line, self.opcode.column, "undeclared mode b"));
            }
            return Ok((Mode::A, Mode::B));
        }
        let p = self.get(k, "mode pair", parse_pair)?;
        for m in [p.0, p.1] {
            check_declared(self.line, self.rest[k].column, m, declared)?;
        }
        Ok(p)
    }

    fn duration(&self, k: usize) -> Result<Duration> {
        let d = self.get(k, "duration", parse_duration)?;
        let v = match d {
            Duration::Tau(x) | Duration::Seconds(x) => x,
        };
        if v < 0.0 {
            return Err(err(
                self.line,
                self.rest[k].column,
                "durations must be non-negative",
            ));
        }
        Ok(d)
    }

    fn angle(&self, k: usize) -> Result<Angle> {
        self.get(k, "angle", parse_angle)
    }
}

fn check_declared(line: usize, column: usize, mode: Mode, declared: usize) -> Result<()> {
    if mode.index() >= declared {
        return Err(err(
            line,
            column,
            format!("undeclared mode {mode} (the header declares {declared} mode(s))"),
        ));
    }
    Ok(())
}

fn parse_instruction(line: usize, toks: &[Tok<'_>], declared: usize) -> Result<Instruction> {
    let opcode = &toks[0];
    let a = Args {
        line,
        opcode,
        rest: &toks[1..],
    };
    let ins = match opcode.text.to_ascii_uppercase().as_str() {
        "PREP" => {
            a.arity(&[2, 3])?;
            let kind = a.rest[0].text.to_ascii_lowercase();
            match (kind.as_str(), a.rest.len()) {
                ("spin", 2) => Instruction::PrepSpin(a.get(1, "spin state", |s| match s {
                    "g" | "G" => Some(Spin::G),
                    "e" | "E" => Some(Spin::E),
                    _ => None,
                })?),
                ("fock", 3) => Instruction::PrepMode {
                    prep: ModePrep::Fock(a.get(1, "Fock level", |s| s.parse().ok())?),
                    mode: a.mode(2, declared)?,
                },
                ("coherent", 3) => Instruction::PrepMode {
                    prep: ModePrep::Coherent(a.get(1, "complex amplitude", parse_complex)?),
                    mode: a.mode(2, declared)?,
                },
                ("thermal", 3) => {
                    let nbar = a.get(1, "mean occupation", parse_f64)?;
                    if nbar < 0.0 {
                        return Err(err(
                            line,
                            a.rest[1].column,
                            "thermal occupation must be non-negative",
                        ));
                    }
                    Instruction::PrepMode {
                        prep: ModePrep::Thermal(nbar),
                        mode: a.mode(2, declared)?,
                    }
                }
                ("spin" | "fock" | "coherent" | "thermal", n) => {
                    return Err(err(
                        line,
                        a.rest[0].column,
                        format!(
                            "PREP {kind} expects {} argument(s), got {}",
                            if kind == "spin" { 2 } else { 3 },
                            n
                        ),
                    ))
                }
                _ => {
                    return Err(err(
                        line,
                        a.rest[0].column,
                        format!("unknown preparation {}", a.rest[0].text),
                    ))
                }
            }
        }
        "R" => {
            a.arity(&[2])?;
            Instruction::Rotate {
                theta: a.angle(0)?,
                phi: a.angle(1)?,
            }
        }
        "CBS" | "BS" => {
            a.arity(&[2, 3])?;
            let (duration, upsilon, modes) = (a.duration(0)?, a.angle(1)?, a.pair(2, declared)?);
            if opcode.text.eq_ignore_ascii_case("CBS") {
                Instruction::Cbs {
                    duration,
                    upsilon,
                    modes,
                }
            } else {
                Instruction::Bs {
                    duration,
                    upsilon,
                    modes,
                }
            }
        }
        "DISP" => {
            a.arity(&[2])?;
            Instruction::Disp {
                alpha: a.get(0, "complex amplitude", parse_complex)?,
                mode: a.mode(1, declared)?,
            }
        }
        "BSB" => {
            a.arity(&[1])?;
            Instruction::Bsb {
                mode: a.mode(0, declared)?,
            }
        }
        "RSB" => {
            a.arity(&[1])?;
            Instruction::Rsb {
                mode: a.mode(0, declared)?,
            }
        }
        "JSB" => {
            a.arity(&[2, 3])?;
            let omega0 = a.get(0, "Rabi frequency", parse_f64)?;
            if omega0 <= 0.0 {
                return Err(err(
                    line,
                    a.rest[0].column,
                    "JSB Rabi frequency must be positive",
                ));
            }
            Instruction::Jsb {
                omega0,
                duration: a.duration(1)?,
                modes: a.pair(2, declared)?,
            }
        }
        "WAIT" => {
            a.arity(&[1])?;
            Instruction::Wait {
                duration: a.duration(0)?,
            }
        }
        "MEASURE" => {
            a.arity(&[0, 1, 2])?;
            if a.rest.is_empty() {
                Instruction::Measure(None)
            } else {
                let what = a.rest[0].text.to_ascii_lowercase();
                let obs = match (what.as_str(), a.rest.len()) {
                    ("spin", 1) => Observable::Spin,
                    ("fock", 2) => Observable::Fock(a.mode(1, declared)?),
                    ("parity", 2) => Observable::Parity(a.mode(1, declared)?),
                    ("noon", 2) => {
                        let n: usize = a.get(1, "NOON order", |s| {
                            s.parse().ok().filter(|&n: &usize| n >= 1)
                        })?;
                        check_declared(line, a.rest[1].column, Mode::B, declared)?;
                        Observable::Noon(n)
                    }
                    ("spin" | "fock" | "parity" | "noon", n) => {
                        return Err(err(
                            line,
                            a.rest[0].column,
                            format!(
                                "MEASURE {what} expects {} argument(s), got {n}",
                                if what == "spin" { 1 } else { 2 }
                            ),
                        ))
                    }
                    _ => {
                        return Err(err(
                            line,
                            a.rest[0].column,
                            format!("unknown observable {}", a.rest[0].text),
                        ))
                    }
                };
                Instruction::Measure(Some(obs))
            }
        }
        _ => {
            return Err(err(
                line,
                opcode.column,
                format!("unknown opcode {}", opcode.text),
            ))
        }
    };
    Ok(ins)
}

/// Structural rules shared by parsed and hand-built programs: preparations
/// first, measurements last, no repeated preparation of a factor, every
/// mode declared, durations non-negative.
pub fn validate(program: &Program) -> Result<()> {
    let declared = program.declared_modes();
    let mut phase = 0; // 0: preparations, 1: gates, 2: measurements
    let mut prepared_spin = false;
    let mut prepared_modes: Vec<Mode> = Vec::new();
    for ins in &program.instructions {
        let Span { line, column } = ins.span;
        let node = &ins.node;
        let here = |m: String| err(line, column, m);
        if node.is_prep() {
            if phase > 0 {
                return Err(here("PREP must come before every other instruction".into()));
            }
        } else if node.is_measure() {
            phase = 2;
        } else if phase == 2 {
            return Err(here(format!("{} after the MEASURE block", node.opcode())));
        } else {
            phase = 1;
        }
        match node {
            Instruction::PrepSpin(_) => {
                if prepared_spin {
                    return Err(here("spin prepared twice".into()));
                }
                prepared_spin = true;
            }
            Instruction::PrepMode { mode, .. } => {
                if prepared_modes.contains(mode) {
                    return Err(here(format!("mode {mode} prepared twice")));
                }
                prepared_modes.push(*mode);
            }
            Instruction::Cbs {
                duration, modes, ..
            }
            | Instruction::Bs {
                duration, modes, ..
            }
            | Instruction::Jsb {
                duration, modes, ..
            } => {
                check_duration(duration, line, column)?;
                if modes.0 == modes.1 {
                    return Err(here(
                        "a two-mode instruction needs two distinct modes".into(),
                    ));
                }
            }
            Instruction::Wait { duration } => check_duration(duration, line, column)?,
            _ => {}
        }
        for m in node.modes() {
            check_declared(line, column, m, declared)?;
        }
    }
    Ok(())
}

fn check_duration(d: &Duration, line: usize, column: usize) -> Result<()> {
    let v = match d {
        Duration::Tau(x) | Duration::Seconds(x) => *x,
    };
    if !(v >= 0.0) || !v.is_finite() {
        return Err(err(line, column, "durations must be non-negative"));
    }
    Ok(())
}

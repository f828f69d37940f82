use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One register-machine instruction. Registers are `R_0 .. R_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    /// `R_j := R_j + R_i`
    Add { j: usize, i: usize },
    /// `R_j := R_j - R_i`
    Sub { j: usize, i: usize },
    /// `R_j := a` with `a` in {0, 1}
    Set { j: usize, a: u8 },
    /// jump to `p` when `R_j >= 0`
    Jgez { j: usize, p: usize },
    Halt,
}

impl Instruction {
    fn registers(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Instruction::Add { j, i } | Instruction::Sub { j, i } => (Some(j), Some(i)),
            Instruction::Set { j, .. } | Instruction::Jgez { j, .. } => (Some(j), None),
            Instruction::Halt => (None, None),
        };
        a.into_iter().chain(b)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Add { j, i } => write!(f, "ADD {j} {i}"),
            Instruction::Sub { j, i } => write!(f, "SUB {j} {i}"),
            Instruction::Set { j, a } => write!(f, "SET {j} {a}"),
            Instruction::Jgez { j, p } => write!(f, "JGEZ {j} {p}"),
            Instruction::Halt => f.write_str("HALT"),
        }
    }
}

/// A labeled instruction list; labels are positions from 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterProgram {
    instructions: Vec<Instruction>,
    registers: usize,
}

impl RegisterProgram {
    /// Validates jump targets and constants. The register count is one
    /// more than the largest index used, and at least 1.
    pub fn new(instructions: Vec<Instruction>) -> Result<Self> {
        if instructions.is_empty() {
            return Err(Error::InvalidProgram("empty program".into()));
        }
        let len = instructions.len();
        for (label, ins) in instructions.iter().enumerate() {
            match *ins {
                Instruction::Jgez { p, .. } if p >= len => {
                    return Err(Error::InvalidProgram(format!(
                        "instruction {label} jumps to {p}, past the last label {}",
                        len - 1
                    )))
                }
                Instruction::Set { a, .. } if a > 1 => {
                    return Err(Error::InvalidProgram(format!(
                        "instruction {label} sets a register to {a}; only 0 and 1 are allowed"
                    )))
                }
                _ => {}
            }
        }
        let registers = 1 + instructions.iter().flat_map(Instruction::registers).max().unwrap_or(0);
        Ok(RegisterProgram {
            instructions,
            registers,
        })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Number of registers, `k + 1`.
    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn get(&self, label: usize) -> Option<&Instruction> {
        self.instructions.get(label)
    }
}

fn parse_line(text: &str, line: usize, jumps: &mut Vec<(usize, usize)>) -> Result<Instruction> {
    let err = |m: String| Error::Assembly { line, message: m };
    let mut words = text.split_whitespace();
    let op = words.next().unwrap_or_default();
    let nums: Vec<&str> = words.collect();
    let num = |k: usize| -> Result<usize> {
        nums[k]
            .parse()
            .map_err(|_| err(format!("`{}` is not a register index or label", nums[k])))
    };
    let want = |n: usize| -> Result<()> {
        if nums.len() != n {
            return Err(err(format!("`{op}` takes {n} operands, got {}", nums.len())));
        }
        Ok(())
    };
    let ins = match op.to_ascii_uppercase().as_str() {
        "ADD" => {
            want(2)?;
            Instruction::Add { j: num(0)?, i: num(1)? }
        }
        "SUB" => {
            want(2)?;
            Instruction::Sub { j: num(0)?, i: num(1)? }
        }
        "SET" => {
            want(2)?;
            let a = num(1)?;
            if a > 1 {
                return Err(err(format!("SET constant must be 0 or 1, got {a}")));
            }
            Instruction::Set { j: num(0)?, a: a as u8 }
        }
        "JGEZ" => {
            want(2)?;
            let p = num(1)?;
            jumps.push((line, p));
            Instruction::Jgez { j: num(0)?, p }
        }
        "HALT" => {
            want(0)?;
            Instruction::Halt
        }
        other => return Err(err(format!("unknown opcode `{other}`"))),
    };
    Ok(ins)
}

/// Parses the assembly format: one instruction per line, `#` comments,
/// blank lines ignored, labels numbered from 0 in order.
impl FromStr for RegisterProgram {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut instructions = Vec::new();
        let mut jumps = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or_default().trim();
            if body.is_empty() {
                continue;
            }
            instructions.push(parse_line(body, n + 1, &mut jumps)?);
        }
        if let Some((line, p)) = jumps.iter().find(|(_, p)| *p >= instructions.len()) {
            return Err(Error::Assembly {
                line: *line,
                message: format!("jump target {p} is past the last label"),
            });
        }
        if instructions.is_empty() {
            return Err(Error::Assembly {
                line: 1,
                message: "no instructions".into(),
            });
        }
        RegisterProgram::new(instructions)
    }
}

impl fmt::Display for RegisterProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

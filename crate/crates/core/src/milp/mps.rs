use std::io::{self, Write};

use super::{MixedIntegerProgram, Relation, Sense};

/// Writes the model in free-format MPS. Maximization is flagged with an
/// `OBJSENSE` section.
pub fn write_mps<W: Write>(mip: &MixedIntegerProgram, name: &str, mut out: W) -> io::Result<()> {
    let lp = &mip.lp;
    writeln!(out, "NAME {name}")?;
    if lp.sense == Sense::Maximize {
        writeln!(out, "OBJSENSE\n    MAX")?;
    }
    writeln!(out, "ROWS")?;
    writeln!(out, " N  obj")?;
    for c in &lp.constraints {
        let tag = match c.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        writeln!(out, " {tag}  {}", c.name)?;
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            columns[j].push((i, a));
        }
    }
    writeln!(out, "COLUMNS")?;
    let mut in_int = false;
    for (j, v) in lp.variables.iter().enumerate() {
        if mip.integral[j] != in_int {
            let marker = if mip.integral[j] { "INTORG" } else { "INTEND" };
            writeln!(out, "    MARKER  'MARKER'  '{marker}'")?;
            in_int = mip.integral[j];
        }
        if v.objective != 0.0 {
            writeln!(out, "    {}  obj  {}", v.name, v.objective)?;
        }
        for &(i, a) in &columns[j] {
            writeln!(out, "    {}  {}  {a}", v.name, lp.constraints[i].name)?;
        }
    }
    if in_int {
        writeln!(out, "    MARKER  'MARKER'  'INTEND'")?;
    }
    writeln!(out, "RHS")?;
    for c in &lp.constraints {
        if c.rhs != 0.0 {
            writeln!(out, "    rhs  {}  {}", c.name, c.rhs)?;
        }
    }
    writeln!(out, "BOUNDS")?;
    for (j, v) in lp.variables.iter().enumerate() {
        if mip.integral[j] && v.lower == 0.0 && v.upper == 1.0 {
            writeln!(out, " BV bnd  {}", v.name)?;
            continue;
        }
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => writeln!(out, " FR bnd  {}", v.name)?,
            (false, true) => {
                writeln!(out, " MI bnd  {}", v.name)?;
                writeln!(out, " UP bnd  {}  {}", v.name, v.upper)?;
            }
            (true, up) => {
                if v.lower != 0.0 {
                    writeln!(out, " LO bnd  {}  {}", v.name, v.lower)?;
                }
                if up {
                    writeln!(out, " UP bnd  {}  {}", v.name, v.upper)?;
                }
            }
        }
    }
    writeln!(out, "ENDATA")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_model_layout() {
        let mut mip = MixedIntegerProgram::new(Sense::Maximize);
        let x = mip.add_binary("x", 3.0, 0);
        let y = mip.add_continuous("y", f64::NEG_INFINITY, 4.0, 1.0);
        mip.add_constraint("c1", vec![(x, 1.0), (y, 2.0)], Relation::Le, 5.0);
        let mut buf = Vec::new();
        write_mps(&mip, "demo", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "NAME demo\nOBJSENSE\n    MAX\nROWS\n N  obj\n L  c1\nCOLUMNS\n    MARKER  'MARKER'  'INTORG'\n    x  obj  3\n    x  c1  1\n    MARKER  'MARKER'  'INTEND'\n    y  obj  1\n    y  c1  2\nRHS\n    rhs  c1  5\nBOUNDS\n BV bnd  x\n MI bnd  y\n UP bnd  y  4\nENDATA\n";
        assert_eq!(text, expected);
    }
}

//! Mini-grammars for domains, harmonic oracles and boundary data.
//!
//! ```text
//! domain  := ball(c;r) | box(lo;hi) | annulus(c;r_in,r_out)
//!          | punctured_ball(c;r) | halfspaces(n,b; n,b; ...) | diff(domain,domain)
//! oracle  := linear(a;b) | quad(d1,..,dN) | quad(row;row;...) | fundamental(z0)
//!          | poisson(file)
//! data    := coordinate(i) | constant(c) | distance_to(y) | trace(oracle)
//!          | tabulated(file) | oracle
//! ```
//!
//! Vectors are comma separated. Whitespace is ignored everywhere except
//! inside file names. `coordinate(i)` is 1-based. A `poisson` file holds one
//! value per line at equispaced angles `2 pi k / M`; a `tabulated` file holds
//! rows `x1,...,xN,value`. Blank lines and lines starting with `#` are skipped
//! in both.

use std::fmt;
use std::path::Path;

use ballwalk_core::{BoundaryData, Domain, HarmonicOracle, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct GrammarError {
    /// 1-based character column in the spec string (0 for file contents).
    pub column: usize,
    pub message: String,
}

impl fmt::Display for GrammarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.column == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "column {}: {}", self.column, self.message)
        }
    }
}

impl std::error::Error for GrammarError {}

type Parsed<T> = Result<T, GrammarError>;

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    base_dir: Option<&'a Path>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, base_dir: Option<&'a Path>) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            base_dir,
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Parsed<T> {
        self.error_at(self.pos, message)
    }

    fn error_at<T>(&self, pos: usize, message: impl Into<String>) -> Parsed<T> {
        Err(GrammarError {
            column: pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Parsed<()> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.error(format!("expected '{c}', found '{found}'")),
                None => self.error(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn finish(&mut self) -> Parsed<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.error(format!("unexpected '{c}' after expression")),
        }
    }

    fn ident(&mut self) -> Parsed<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected a name");
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn number(&mut self) -> Parsed<f64> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+'))
        {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ if text.is_empty() => self.error_at(start, "expected a number"),
            _ => self.error_at(start, format!("invalid number '{text}'")),
        }
    }

    /// One or more comma-separated numbers.
    fn list(&mut self) -> Parsed<Vec<f64>> {
        let mut out = vec![self.number()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            out.push(self.number()?);
        }
        Ok(out)
    }

    /// Semicolon-separated groups of comma-separated numbers, up to `)`.
    fn groups(&mut self) -> Parsed<Vec<Vec<f64>>> {
        let mut out = vec![self.list()?];
        while self.eat(';') {
            out.push(self.list()?);
        }
        Ok(out)
    }

    fn point(&self, pos: usize, coords: &[f64]) -> Parsed<Point> {
        Point::new(coords).or_else(|e| self.error_at(pos, e.to_string()))
    }

    /// Raw text up to the matching `)`, for file names.
    fn raw_argument(&mut self) -> Parsed<String> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| *c != ')') {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let text = text.trim().to_string();
        if text.is_empty() {
            return self.error_at(start, "expected a file name");
        }
        Ok(text)
    }

    fn resolve(&self, file: &str) -> std::path::PathBuf {
        match self.base_dir {
            Some(dir) if Path::new(file).is_relative() => dir.join(file),
            _ => Path::new(file).to_path_buf(),
        }
    }

    fn domain(&mut self) -> Parsed<Domain> {
        let (start, name) = self.ident()?;
        self.expect('(')?;
        let args_at = self.pos;
        let domain = match name.as_str() {
            "diff" => {
                let outer = self.domain()?;
                self.expect(',')?;
                let hole = self.domain()?;
                Domain::difference(outer, hole)
            }
            "ball" | "punctured_ball" => {
                let g = self.fixed_groups(&[0, 1])?;
                let c = self.point(args_at, &g[0])?;
                if name == "ball" {
                    Domain::ball(c, g[1][0])
                } else {
                    Domain::punctured_ball(c, g[1][0])
                }
            }
            "box" => {
                let g = self.fixed_groups(&[0, 0])?;
                let lo = self.point(args_at, &g[0])?;
                let hi = self.point(args_at, &g[1])?;
                Domain::cuboid(lo, hi)
            }
            "annulus" => {
                let g = self.fixed_groups(&[0, 2])?;
                let c = self.point(args_at, &g[0])?;
                Domain::annulus(c, g[1][0], g[1][1])
            }
            "halfspaces" => {
                let mut facets = Vec::new();
                for g in self.groups()? {
                    if g.len() < 2 {
                        return self.error_at(args_at, "each halfspace needs a normal and an offset");
                    }
                    let (b, n) = g.split_last().expect("nonempty");
                    facets.push((self.point(args_at, n)?, *b));
                }
                Domain::halfspaces(facets)
            }
            _ => return self.error_at(start, format!("unknown domain '{name}'")),
        };
        self.expect(')')?;
        domain.or_else(|e| self.error_at(start, e.to_string()))
    }

    /// Groups with prescribed sizes (0 = any nonzero size).
    fn fixed_groups(&mut self, sizes: &[usize]) -> Parsed<Vec<Vec<f64>>> {
        let at = self.pos;
        let g = self.groups()?;
        if g.len() != sizes.len() {
            return self.error_at(at, format!("expected {} ';'-separated groups", sizes.len()));
        }
        for (group, &size) in g.iter().zip(sizes) {
            if size != 0 && group.len() != size {
                return self.error_at(at, format!("expected {size} value(s) in a group"));
            }
        }
        Ok(g)
    }

    fn oracle_body(&mut self, start: usize, name: &str) -> Parsed<Option<HarmonicOracle>> {
        let args_at = self.pos;
        let oracle = match name {
            "linear" => {
                let g = self.fixed_groups(&[0, 1])?;
                HarmonicOracle::linear(self.point(args_at, &g[0])?, g[1][0])
            }
            "quad" => {
                let g = self.groups()?;
                if g.len() == 1 {
                    HarmonicOracle::diagonal_quadratic(&g[0])
                } else {
                    let dim = g.len();
                    if g.iter().any(|row| row.len() != dim) {
                        return self.error_at(args_at, "quadratic rows must form a square matrix");
                    }
                    HarmonicOracle::quadratic(g.concat(), dim)
                }
            }
            "fundamental" => {
                let z0 = self.list()?;
                Ok(HarmonicOracle::fundamental(self.point(args_at, &z0)?))
            }
            "poisson" => {
                let file = self.raw_argument()?;
                let values = read_table(&self.resolve(&file), 1)?
                    .into_iter()
                    .map(|row| row[0])
                    .collect();
                HarmonicOracle::poisson_disk(values)
            }
            _ => return Ok(None),
        };
        oracle
            .map(Some)
            .or_else(|e| self.error_at(start, e.to_string()))
    }

    fn oracle(&mut self) -> Parsed<HarmonicOracle> {
        let (start, name) = self.ident()?;
        self.expect('(')?;
        match self.oracle_body(start, &name)? {
            Some(oracle) => {
                self.expect(')')?;
                Ok(oracle)
            }
            None => self.error_at(start, format!("unknown oracle '{name}'")),
        }
    }

    fn data(&mut self) -> Parsed<BoundaryData> {
        let (start, name) = self.ident()?;
        self.expect('(')?;
        let args_at = self.pos;
        let data = match name.as_str() {
            "coordinate" => {
                let i = self.number()?;
                if i < 1.0 || i.fract() != 0.0 {
                    return self.error_at(args_at, "coordinate index is 1-based");
                }
                BoundaryData::Coordinate(i as usize - 1)
            }
            "constant" => BoundaryData::Constant(self.number()?),
            "distance_to" => {
                let y = self.list()?;
                BoundaryData::DistanceTo(self.point(args_at, &y)?)
            }
            "trace" => BoundaryData::HarmonicTrace(self.oracle()?),
            "tabulated" => {
                let file = self.raw_argument()?;
                let rows = read_table(&self.resolve(&file), 0)?;
                let mut points = Vec::with_capacity(rows.len());
                let mut values = Vec::with_capacity(rows.len());
                for row in rows {
                    if row.len() < 2 {
                        return self.error_at(args_at, "tabulated rows need coordinates and a value");
                    }
                    let (v, x) = row.split_last().expect("nonempty");
                    points.push(self.point(args_at, x)?);
                    values.push(*v);
                }
                BoundaryData::tabulated(points, values).or_else(|e| self.error_at(start, e.to_string()))?
            }
            _ => match self.oracle_body(start, &name)? {
                Some(oracle) => BoundaryData::HarmonicTrace(oracle),
                None => return self.error_at(start, format!("unknown boundary data '{name}'")),
            },
        };
        self.expect(')')?;
        Ok(data)
    }
}

/// Reads numeric CSV rows; `width` 0 accepts any (consistent) width.
fn read_table(path: &Path, width: usize) -> Parsed<Vec<Vec<f64>>> {
    let fail = |message: String| GrammarError { column: 0, message };
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail(format!("{}:{}: {e}", path.display(), n + 1)))?;
        let expected = if width != 0 { width } else { rows.first().map_or(row.len(), Vec::len) };
        if row.len() != expected {
            return Err(fail(format!(
                "{}:{}: expected {expected} column(s), found {}",
                path.display(),
                n + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_domain(src: &str) -> Parsed<Domain> {
    let mut p = Parser::new(src, None);
    let d = p.domain()?;
    p.finish()?;
    Ok(d)
}

/// Parses an oracle; relative file names resolve against `base_dir`.
pub fn parse_oracle(src: &str, base_dir: Option<&Path>) -> Parsed<HarmonicOracle> {
    let mut p = Parser::new(src, base_dir);
    let o = p.oracle()?;
    p.finish()?;
    Ok(o)
}

/// Parses boundary data; relative file names resolve against `base_dir`.
pub fn parse_data(src: &str, base_dir: Option<&Path>) -> Parsed<BoundaryData> {
    let mut p = Parser::new(src, base_dir);
    let d = p.data()?;
    p.finish()?;
    Ok(d)
}

/// Parses `x1,...,xN`.
pub fn parse_vector(src: &str) -> Parsed<Vec<f64>> {
    let mut p = Parser::new(src, None);
    let v = p.list()?;
    p.finish()?;
    Ok(v)
}

/// A rectangular grid `lo;hi;n1,...,nN`, first axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Grid {
    pub fn points(&self) -> Vec<Point> {
        let total: usize = self.counts.iter().product();
        (0..total)
            .map(|mut flat| {
                let mut coords = vec![0.0; self.counts.len()];
                for axis in (0..self.counts.len()).rev() {
                    let n = self.counts[axis];
                    let k = flat % n;
                    flat /= n;
                    coords[axis] = if n == 1 {
                        0.5 * (self.lo[axis] + self.hi[axis])
                    } else {
                        self.lo[axis] + (self.hi[axis] - self.lo[axis]) * k as f64 / (n - 1) as f64
                    };
                }
                Point::new(&coords).expect("grid dimension validated")
            })
            .collect()
    }
}

pub fn parse_grid(src: &str) -> Parsed<Grid> {
    let mut p = Parser::new(src, None);
    let g = p.fixed_groups(&[0, 0, 0])?;
    p.finish()?;
    let dim = g[0].len();
    if g[1].len() != dim || g[2].len() != dim {
        return p.error_at(0, "grid corners and counts must have the same length");
    }
    if dim > ballwalk_core::MAX_DIM {
        return p.error_at(0, "grid dimension exceeds 16");
    }
    let mut counts = Vec::with_capacity(dim);
    for &c in &g[2] {
        if c < 1.0 || c.fract() != 0.0 || c > 1e6 {
            return p.error_at(0, "grid counts must be positive integers");
        }
        counts.push(c as usize);
    }
    if counts.iter().product::<usize>() > 10_000_000 {
        return p.error_at(0, "grid has more than 1e7 points");
    }
    Ok(Grid {
        lo: g[0].clone(),
        hi: g[1].clone(),
        counts,
    })
}

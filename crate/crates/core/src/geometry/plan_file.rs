//! Plain-text floor plan files.
//!
//! One record per line, whitespace separated, `#` starts a comment:
//!
//! ```text
//! # x1 y1 x2 y2 in meters, reflective flag is 1/0 (or true/false)
//! wall 0.0 0.0 25.0 0.0 1
//! obstruction 11.0 2.9 12.0 2.9
//! bs 1.0 4.5
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{FloorPlan, Point2D, WallSegment};
use crate::error::{MintError, Result};

/// Parsed contents of a plan file: the floor plan and its base stations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanFile {
    pub plan: FloorPlan,
    pub base_stations: Vec<Point2D>,
}

impl PlanFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut out = PlanFile::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| MintError::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let kind = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let floats = |n: usize| -> Result<Vec<f64>> {
                if rest.len() < n {
                    return Err(err(format!("`{kind}` expects {n} numbers, got {}", rest.len())));
                }
                rest[..n]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("not a finite number: `{s}`")))
                    })
                    .collect()
            };
            match kind {
                "wall" => {
                    let v = floats(4)?;
                    if rest.len() != 5 {
                        return Err(err("`wall` expects x1 y1 x2 y2 reflective".into()));
                    }
                    let reflective = match rest[4] {
                        "1" | "true" => true,
                        "0" | "false" => false,
                        other => return Err(err(format!("bad reflective flag `{other}`"))),
                    };
                    let wall = WallSegment::new(
                        Point2D::new(v[0], v[1]),
                        Point2D::new(v[2], v[3]),
                        reflective,
                    )
                    .map_err(|e| err(e.to_string()))?;
                    out.plan.walls.push(wall);
                }
                "obstruction" => {
                    let v = floats(4)?;
                    if rest.len() != 4 {
                        return Err(err("`obstruction` expects x1 y1 x2 y2".into()));
                    }
                    let seg = WallSegment::new(
                        Point2D::new(v[0], v[1]),
                        Point2D::new(v[2], v[3]),
                        false,
                    )
                    .map_err(|e| err(e.to_string()))?;
                    out.plan.obstructions.push(seg);
                }
                "bs" => {
                    let v = floats(2)?;
                    if rest.len() != 2 {
                        return Err(err("`bs` expects x y".into()));
                    }
                    out.base_stations.push(Point2D::new(v[0], v[1]));
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# mint floor plan v1: wall x1 y1 x2 y2 reflective | obstruction x1 y1 x2 y2 | bs x y\n");
        for w in &self.plan.walls {
            let _ = writeln!(
                s,
                "wall {} {} {} {} {}",
                w.endpoint_a.x,
                w.endpoint_a.y,
                w.endpoint_b.x,
                w.endpoint_b.y,
                u8::from(w.reflective)
            );
        }
        for w in &self.plan.obstructions {
            let _ = writeln!(
                s,
                "obstruction {} {} {} {}",
                w.endpoint_a.x, w.endpoint_a.y, w.endpoint_b.x, w.endpoint_b.y
            );
        }
        for bs in &self.base_stations {
            let _ = writeln!(s, "bs {} {}", bs.x, bs.y);
        }
        s
    }
}

pub fn read_plan(path: impl AsRef<Path>) -> Result<PlanFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MintError::io(path, e))?;
    PlanFile::parse(&text, &path.display().to_string())
}

pub fn write_plan(path: impl AsRef<Path>, plan: &PlanFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, plan.to_text()).map_err(|e| MintError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_record_kinds() {
        let text = "# comment\nwall 0 0 5 0 1\nwall 5 0 5 5 false # door\n\nobstruction 1 1 2 2\nbs 1.5 2.5\n";
        let pf = PlanFile::parse(text, "test").unwrap();
        assert_eq!(pf.plan.walls.len(), 2);
        assert!(pf.plan.walls[0].reflective);
        assert!(!pf.plan.walls[1].reflective);
        assert_eq!(pf.plan.obstructions.len(), 1);
        assert_eq!(pf.base_stations, vec![Point2D::new(1.5, 2.5)]);
        assert_eq!(PlanFile::parse(&pf.to_text(), "again").unwrap(), pf);
    }

    #[test]
    fn reports_line_numbers() {
        let err = PlanFile::parse("wall 0 0 5 0 1\nwall 0 0 0 0 1\n", "p.txt").unwrap_err();
        match err {
            MintError::Parse { line, path, .. } => {
                assert_eq!(line, 2);
                assert_eq!(path, "p.txt");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(PlanFile::parse("door 1 2 3 4", "p").is_err());
        assert!(PlanFile::parse("wall 1 2 3 x 1", "p").is_err());
        assert!(PlanFile::parse("wall 1 2 3 4 maybe", "p").is_err());
    }
}

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Axis, Grid, Landscape, LandscapeMeta};
use crate::error::{Error, Result};

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// CSV layout: three `#` header lines (`class,row,picture`, then the α and β
/// axes as `name,start,stop,count`), then one line of α-ordered values per β.
pub fn write_csv<W: Write>(map: &Landscape, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let m = &map.meta;
    writeln!(out, "# {},{},{}", opt(m.class), opt(m.row), opt(m.picture))?;
    for (name, ax) in [("alpha", map.alpha), ("beta", map.beta)] {
        writeln!(out, "# {name},{},{},{}", ax.start(), ax.stop(), ax.count())?;
    }
    for i in 0..map.n_beta() {
        let line: Vec<String> = map
            .values
            .row(i)
            .iter()
            .map(|v| format!("{v:.8e}"))
            .collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(map: &Landscape, path: impl AsRef<Path>) -> Result<()> {
    write_csv(map, File::create(path)?)
}

fn header(
    line: Option<(usize, std::io::Result<String>)>,
    n: usize,
    what: &str,
) -> Result<(usize, Vec<String>)> {
    let (k, text) = match line {
        Some((k, text)) => (k + 1, text?),
        None => {
            return Err(Error::Parse {
                line: n,
                reason: format!("missing {what} header"),
            })
        }
    };
    let Some(body) = text.strip_prefix('#') else {
        return Err(Error::Parse {
            line: k,
            reason: format!("expected '# {what}' header"),
        });
    };
    Ok((k, body.split(',').map(|s| s.trim().to_string()).collect()))
}

fn field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<Option<T>> {
    if s == "-" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Parse {
        line,
        reason: format!("bad {what} '{s}'"),
    })
}

fn axis(fields: &[String], line: usize, name: &str) -> Result<Axis> {
    if fields.len() != 4 || fields[0] != name {
        return Err(Error::Parse {
            line,
            reason: format!("expected '# {name},start,stop,count'"),
        });
    }
    let num = |s: &str| {
        s.parse::<f64>().map_err(|_| Error::Parse {
            line,
            reason: format!("bad number '{s}'"),
        })
    };
    let count = fields[3].parse::<usize>().map_err(|_| Error::Parse {
        line,
        reason: format!("bad count '{}'", fields[3]),
    })?;
    Axis::new(num(&fields[1])?, num(&fields[2])?, count).map_err(|e| Error::Parse {
        line,
        reason: e.to_string(),
    })
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Landscape> {
    let mut lines = input.lines().enumerate();
    let (l1, meta) = header(lines.next(), 1, "class,row,picture")?;
    if meta.len() != 3 {
        return Err(Error::Parse {
            line: l1,
            reason: "expected '# class,row,picture'".into(),
        });
    }
    let meta = LandscapeMeta {
        class: field(&meta[0], l1, "class")?,
        row: field(&meta[1], l1, "row")?,
        picture: field(&meta[2], l1, "picture")?,
        config: None,
        policy: None,
    };
    let (l2, a) = header(lines.next(), 2, "alpha")?;
    let alpha = axis(&a, l2, "alpha")?;
    let (l3, b) = header(lines.next(), 3, "beta")?;
    let beta = axis(&b, l3, "beta")?;

    let mut data = Vec::with_capacity(alpha.count() * beta.count());
    let mut rows = 0;
    for (k, text) in lines {
        let (line, text) = (k + 1, text?);
        if text.trim().is_empty() {
            continue;
        }
        if rows == beta.count() {
            return Err(Error::Parse {
                line,
                reason: format!("more than {} data rows", beta.count()),
            });
        }
        let before = data.len();
        for cell in text.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line,
                reason: format!("bad value '{}'", cell.trim()),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parse {
                    line,
                    reason: format!("probability {v} outside [0, 1]"),
                });
            }
            data.push(v);
        }
        if data.len() - before != alpha.count() {
            return Err(Error::Parse {
                line,
                reason: format!(
                    "expected {} values, found {}",
                    alpha.count(),
                    data.len() - before
                ),
            });
        }
        rows += 1;
    }
    if rows != beta.count() {
        return Err(Error::Parse {
            line: 3 + rows + 1,
            reason: format!("expected {} data rows, found {rows}", beta.count()),
        });
    }
    Landscape::new(
        Grid::new(beta.count(), alpha.count(), data)?,
        alpha,
        beta,
        meta,
    )
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Landscape> {
    read_csv(BufReader::new(File::open(path)?))
}

/// Gray levels `round(255 P)`, highest β in the top row, α increasing to the right.
fn gray(map: &Landscape) -> Vec<u8> {
    let mut px = Vec::with_capacity(map.n_alpha() * map.n_beta());
    for i in (0..map.n_beta()).rev() {
        px.extend(map.values.row(i).iter().map(|&p| (p * 255.0).round() as u8));
    }
    px
}

/// Binary (P5) PGM.
pub fn write_pgm<W: Write>(map: &Landscape, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    write!(out, "P5\n{} {}\n255\n", map.n_alpha(), map.n_beta())?;
    out.write_all(&gray(map))?;
    out.flush()?;
    Ok(())
}

#[cfg(feature = "png")]
pub fn write_png<W: Write>(map: &Landscape, out: W) -> Result<()> {
    let mut enc = png::Encoder::new(
        BufWriter::new(out),
        map.n_alpha() as u32,
        map.n_beta() as u32,
    );
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let io = |e: png::EncodingError| Error::Io(e.to_string());
    let mut writer = enc.write_header().map_err(io)?;
    writer.write_image_data(&gray(map)).map_err(io)?;
    writer.finish().map_err(io)?;
    Ok(())
}

/// Writes a PNG when the path ends in `.png` (and PNG support is built in),
/// otherwise a PGM.
pub fn render_heatmap(map: &Landscape, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        #[cfg(feature = "png")]
        return write_png(map, File::create(path)?);
        #[cfg(not(feature = "png"))]
        return Err(Error::Contract(
            "PNG output is not enabled in this build".into(),
        ));
    }
    write_pgm(map, File::create(path)?)
}

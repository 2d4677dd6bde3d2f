//! Field ensembles and their on-disk format: raw little-endian f64 values,
//! sample-major then row-major sites, next to a plain-text key/value sidecar
//! carrying geometry, model parameters and the RNG seed. Round trips are
//! bit-exact.

use crate::error::{Error, Result};
use crate::fracop::{OperatorSpec, SymbolKind};
use crate::lattice::{FieldSample, LatticeSpec};
use crate::noise::{JumpAtom, LevyLaw};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

/// Collection of field configurations sharing one lattice and model.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub lattice: LatticeSpec,
    pub operator: OperatorSpec,
    pub law: LevyLaw,
    pub seed: u64,
    pub samples: Vec<FieldSample>,
}

impl Ensemble {
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }
}

fn fmt_f64(x: f64) -> String {
    // shortest representation that round-trips exactly
    format!("{x:?}")
}

fn sidecar_path(data_path: &Path) -> std::path::PathBuf {
    let mut p = data_path.as_os_str().to_owned();
    p.push(".meta");
    std::path::PathBuf::from(p)
}

/// Write an ensemble: `<path>` holds the raw floats, `<path>.meta` the
/// sidecar.
pub fn save_ensemble(ensemble: &Ensemble, path: &Path) -> Result<()> {
    let lattice = &ensemble.lattice;
    let mut meta = String::new();
    meta.push_str(&format!("dim = {}\n", lattice.dim()));
    meta.push_str(&format!(
        "extents = {}\n",
        lattice
            .extents()
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    meta.push_str(&format!(
        "spacings = {}\n",
        lattice
            .spacings()
            .iter()
            .map(|a| fmt_f64(*a))
            .collect::<Vec<_>>()
            .join(",")
    ));
    meta.push_str(&format!("samples = {}\n", ensemble.sample_count()));
    meta.push_str(&format!("seed = {}\n", ensemble.seed));
    meta.push_str(&format!("alpha = {}\n", fmt_f64(ensemble.operator.alpha)));
    meta.push_str(&format!("mass = {}\n", fmt_f64(ensemble.operator.mass)));
    meta.push_str(&format!(
        "symbol_kind = {}\n",
        match ensemble.operator.symbol_kind {
            SymbolKind::Continuum => "continuum",
            SymbolKind::LatticeLaplacian => "lattice_laplacian",
        }
    ));
    meta.push_str(&format!("drift = {}\n", fmt_f64(ensemble.law.drift())));
    meta.push_str(&format!(
        "gaussian_var = {}\n",
        fmt_f64(ensemble.law.gaussian_var())
    ));
    meta.push_str(&format!(
        "jump_rate = {}\n",
        fmt_f64(ensemble.law.jump_rate())
    ));
    meta.push_str(&format!(
        "jumps = {}\n",
        ensemble
            .law
            .jumps()
            .iter()
            .map(|j| format!("{}:{}", fmt_f64(j.value), fmt_f64(j.prob)))
            .collect::<Vec<_>>()
            .join(",")
    ));

    let side = sidecar_path(path);
    fs::write(&side, meta).map_err(|e| Error::io(side.display().to_string(), e))?;

    let mut file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut buf = Vec::with_capacity(ensemble.sample_count() * lattice.sites() * 8);
    for sample in &ensemble.samples {
        for v in sample.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    file.write_all(&buf)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

fn parse_kv(text: &str, path: &str) -> Result<std::collections::HashMap<String, String>> {
    let mut map = std::collections::HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Sidecar {
            path: path.to_string(),
            reason: format!("line {} is not `key = value`", lineno + 1),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn get<'a>(
    map: &'a std::collections::HashMap<String, String>,
    key: &str,
    path: &str,
) -> Result<&'a str> {
    map.get(key).map(String::as_str).ok_or_else(|| Error::Sidecar {
        path: path.to_string(),
        reason: format!("missing key `{key}`"),
    })
}

fn bad(path: &str, reason: impl Into<String>) -> Error {
    Error::Sidecar {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Read an ensemble written by [`save_ensemble`]. The sidecar geometry is
/// validated against the data length; any mismatch is an error.
pub fn load_ensemble(path: &Path) -> Result<Ensemble> {
    let side = sidecar_path(path);
    let side_str = side.display().to_string();
    let text = fs::read_to_string(&side).map_err(|e| Error::io(side_str.clone(), e))?;
    let map = parse_kv(&text, &side_str)?;

    let parse_usize = |key: &str| -> Result<usize> {
        get(&map, key, &side_str)?
            .parse()
            .map_err(|_| bad(&side_str, format!("`{key}` is not an integer")))
    };
    let parse_f64 = |key: &str| -> Result<f64> {
        get(&map, key, &side_str)?
            .parse()
            .map_err(|_| bad(&side_str, format!("`{key}` is not a float")))
    };

    let dim = parse_usize("dim")?;
    let extents: Vec<usize> = get(&map, "extents", &side_str)?
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| bad(&side_str, "bad extent")))
        .collect::<Result<_>>()?;
    let spacings: Vec<f64> = get(&map, "spacings", &side_str)?
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| bad(&side_str, "bad spacing")))
        .collect::<Result<_>>()?;
    if extents.len() != dim || spacings.len() != dim {
        return Err(bad(&side_str, "dim does not match extents/spacings"));
    }
    let lattice = LatticeSpec::new(extents, spacings)?;
    let samples = parse_usize("samples")?;
    let seed: u64 = get(&map, "seed", &side_str)?
        .parse()
        .map_err(|_| bad(&side_str, "`seed` is not an integer"))?;
    let symbol_kind = match get(&map, "symbol_kind", &side_str)? {
        "continuum" => SymbolKind::Continuum,
        "lattice_laplacian" => SymbolKind::LatticeLaplacian,
        other => return Err(bad(&side_str, format!("unknown symbol_kind `{other}`"))),
    };
    let operator = OperatorSpec::new(parse_f64("alpha")?, parse_f64("mass")?, symbol_kind)?;
    let jumps_str = get(&map, "jumps", &side_str)?;
    let jumps: Vec<JumpAtom> = if jumps_str.is_empty() {
        vec![]
    } else {
        jumps_str
            .split(',')
            .map(|pair| {
                let (v, p) = pair
                    .split_once(':')
                    .ok_or_else(|| bad(&side_str, "jump atom is not value:prob"))?;
                Ok(JumpAtom {
                    value: v.trim().parse().map_err(|_| bad(&side_str, "bad jump value"))?,
                    prob: p.trim().parse().map_err(|_| bad(&side_str, "bad jump prob"))?,
                })
            })
            .collect::<Result<_>>()?
    };
    let law = LevyLaw::new(
        parse_f64("drift")?,
        parse_f64("gaussian_var")?,
        parse_f64("jump_rate")?,
        jumps,
    )?;

    let path_str = path.display().to_string();
    let mut file = fs::File::open(path).map_err(|e| Error::io(path_str.clone(), e))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)
        .map_err(|e| Error::io(path_str.clone(), e))?;
    let expected = samples * lattice.sites() * 8;
    if buf.len() != expected {
        return Err(bad(
            &side_str,
            format!(
                "data length {} does not match {} samples of {} sites",
                buf.len(),
                samples,
                lattice.sites()
            ),
        ));
    }
    let mut fields = Vec::with_capacity(samples);
    for s in 0..samples {
        let mut values = Vec::with_capacity(lattice.sites());
        for i in 0..lattice.sites() {
            let off = (s * lattice.sites() + i) * 8;
            values.push(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()));
        }
        fields.push(FieldSample::new(lattice.clone(), values)?);
    }
    Ok(Ensemble {
        lattice,
        operator,
        law,
        seed,
        samples: fields,
    })
}

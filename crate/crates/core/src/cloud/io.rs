use std::collections::HashMap;
use std::io::{Read, Write};

use crate::graph::SocialGraph;

use super::{AffinityTable, CloudId, ModelError, PricingMatrix, RegionId, UserProfile};

/// Parsed `region_label,cloud_label[,lat,lon]` file. Clouds are numbered in
/// order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionsFile {
    pub region_labels: Vec<String>,
    pub cloud_labels: Vec<String>,
    pub region_cloud: Vec<CloudId>,
    /// Present only when every row carries coordinates.
    pub coords: Option<Vec<(f64, f64)>>,
}

impl RegionsFile {
    pub fn region_index(&self) -> HashMap<&str, RegionId> {
        self.region_labels.iter().enumerate().map(|(i, l)| (l.as_str(), RegionId(i))).collect()
    }
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r)
}

/// Yields `(line, record)` pairs, skipping blank lines and an optional header
/// row whose first cell equals `header`.
fn records<R: Read>(
    file: &'static str,
    r: R,
    header: Option<&str>,
) -> Result<Vec<(u64, csv::StringRecord)>, ModelError> {
    let mut out = Vec::new();
    for (i, rec) in reader(r).into_records().enumerate() {
        let rec = rec.map_err(|e| ModelError::Parse {
            file,
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if out.is_empty() && i == 0 && header.is_some_and(|h| rec.get(0) == Some(h)) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn number(file: &'static str, line: u64, field: &str, what: &str) -> Result<f64, ModelError> {
    let v: f64 = field
        .parse()
        .map_err(|_| ModelError::Parse { file, line, message: format!("invalid {what} `{field}`") })?;
    if !v.is_finite() {
        return Err(ModelError::Parse { file, line, message: format!("non-finite {what} `{field}`") });
    }
    Ok(v)
}

pub fn read_regions_csv<R: Read>(r: R) -> Result<RegionsFile, ModelError> {
    const FILE: &str = "regions";
    let mut file = RegionsFile {
        region_labels: Vec::new(),
        cloud_labels: Vec::new(),
        region_cloud: Vec::new(),
        coords: None,
    };
    let mut coords = Vec::new();
    let mut all_coords = true;
    let mut seen = HashMap::new();
    for (line, rec) in records(FILE, r, Some("region_label"))? {
        if rec.len() != 2 && rec.len() != 4 {
            return Err(ModelError::Parse { file: FILE, line, message: format!("expected 2 or 4 fields, found {}", rec.len()) });
        }
        let region = rec[0].to_string();
        if seen.insert(region.clone(), ()).is_some() {
            return Err(ModelError::DuplicateLabel { kind: "region", label: region });
        }
        let cloud = match file.cloud_labels.iter().position(|c| c == &rec[1]) {
            Some(c) => c,
            None => {
                file.cloud_labels.push(rec[1].to_string());
                file.cloud_labels.len() - 1
            }
        };
        if rec.len() == 4 {
            let lat = number(FILE, line, &rec[2], "latitude")?;
            let lon = number(FILE, line, &rec[3], "longitude")?;
            coords.push((lat, lon));
        } else {
            all_coords = false;
        }
        file.region_labels.push(region);
        file.region_cloud.push(CloudId(cloud));
    }
    if all_coords && !coords.is_empty() {
        file.coords = Some(coords);
    }
    Ok(file)
}

/// Square matrix with cloud labels as header row and first column. Rows and
/// columns may appear in any order; the result follows `cloud_labels`.
pub fn read_pricing_csv<R: Read>(r: R, cloud_labels: &[String]) -> Result<PricingMatrix, ModelError> {
    const FILE: &str = "pricing";
    let recs = records(FILE, r, None)?;
    let Some(((_, header), rows)) = recs.split_first() else {
        return Err(ModelError::Parse { file: FILE, line: 1, message: "empty pricing file".into() });
    };
    let lookup = |label: &str| {
        cloud_labels
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| ModelError::UnknownLabel { kind: "cloud", label: label.to_string() })
    };
    let cols: Vec<usize> = header.iter().skip(1).map(lookup).collect::<Result<_, _>>()?;
    let n = cloud_labels.len();
    if cols.len() != n || rows.len() != n {
        return Err(ModelError::PricingShape { rows: rows.len(), cols: cols.len(), expected: n });
    }
    let mut matrix = vec![vec![f64::NAN; n]; n];
    for (line, rec) in rows {
        if rec.len() != n + 1 {
            return Err(ModelError::Parse { file: FILE, line: *line, message: format!("expected {} fields, found {}", n + 1, rec.len()) });
        }
        let row = lookup(&rec[0])?;
        for (j, &col) in cols.iter().enumerate() {
            let p = number(FILE, *line, &rec[j + 1], "price")?;
            if p < 0.0 {
                return Err(ModelError::InvalidValue(format!("pricing line {line}: negative price {p}")));
            }
            matrix[row][col] = p;
        }
    }
    if let Some(r) = matrix.iter().position(|row| row.iter().any(|p| p.is_nan())) {
        return Err(ModelError::InvalidValue(format!("pricing row for cloud `{}` is missing or repeated", cloud_labels[r])));
    }
    PricingMatrix::from_rows(matrix)
}

/// `user_label,region_label,chi,chi_prime`
pub fn read_affinity_csv<R: Read>(
    r: R,
    graph: &SocialGraph,
    regions: &RegionsFile,
) -> Result<AffinityTable, ModelError> {
    const FILE: &str = "affinity";
    let region_index = regions.region_index();
    let mut table = AffinityTable::new(graph.n_users());
    for (line, rec) in records(FILE, r, Some("user_label"))? {
        if rec.len() != 4 {
            return Err(ModelError::Parse { file: FILE, line, message: format!("expected 4 fields, found {}", rec.len()) });
        }
        let user = graph
            .user_id(&rec[0])
            .ok_or_else(|| ModelError::UnknownLabel { kind: "user", label: rec[0].to_string() })?;
        let region = *region_index
            .get(&rec[1])
            .ok_or_else(|| ModelError::UnknownLabel { kind: "region", label: rec[1].to_string() })?;
        let chi = number(FILE, line, &rec[2], "chi")?;
        let chi_prime = number(FILE, line, &rec[3], "chi_prime")?;
        table.set(user, region, chi, chi_prime).map_err(|e| match e {
            ModelError::InvalidValue(m) => ModelError::Parse { file: FILE, line, message: m },
            other => other,
        })?;
    }
    Ok(table)
}

/// `user_label,K_u,beta_u[,region_label]`. Users absent from the file keep
/// the corresponding entry of `defaults`.
pub fn read_profiles_csv<R: Read>(
    r: R,
    graph: &SocialGraph,
    regions: &RegionsFile,
    mut defaults: Vec<UserProfile>,
) -> Result<Vec<UserProfile>, ModelError> {
    const FILE: &str = "profiles";
    let region_index = regions.region_index();
    for (line, rec) in records(FILE, r, Some("user_label"))? {
        if rec.len() != 3 && rec.len() != 4 {
            return Err(ModelError::Parse { file: FILE, line, message: format!("expected 3 or 4 fields, found {}", rec.len()) });
        }
        let user = graph
            .user_id(&rec[0])
            .ok_or_else(|| ModelError::UnknownLabel { kind: "user", label: rec[0].to_string() })?;
        let k = number(FILE, line, &rec[1], "K_u")?;
        let beta = number(FILE, line, &rec[2], "beta_u")?;
        let region = match rec.get(3).filter(|s| !s.is_empty()) {
            Some(label) => Some(
                *region_index
                    .get(label)
                    .ok_or_else(|| ModelError::UnknownLabel { kind: "region", label: label.to_string() })?,
            ),
            None => None,
        };
        defaults[user.0] = UserProfile::new(k, beta, region).map_err(|e| match e {
            ModelError::InvalidValue(m) => ModelError::Parse { file: FILE, line, message: m },
            other => other,
        })?;
    }
    Ok(defaults)
}

fn io_err(e: impl std::fmt::Display) -> ModelError {
    ModelError::Io(e.to_string())
}

pub fn write_regions_csv<W: Write>(regions: &RegionsFile, w: W) -> Result<(), ModelError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for (i, label) in regions.region_labels.iter().enumerate() {
        let cloud = &regions.cloud_labels[regions.region_cloud[i].0];
        match &regions.coords {
            Some(c) => w.write_record([label, cloud, &c[i].0.to_string(), &c[i].1.to_string()]),
            None => w.write_record([label, cloud]),
        }
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_pricing_csv<W: Write>(pricing: &PricingMatrix, cloud_labels: &[String], w: W) -> Result<(), ModelError> {
    let mut w = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(cloud_labels.iter().cloned());
    w.write_record(&header).map_err(io_err)?;
    for (label, row) in cloud_labels.iter().zip(pricing.rows()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|p| p.to_string()));
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_profiles_csv<W: Write>(
    graph: &SocialGraph,
    profiles: &[UserProfile],
    region_labels: &[String],
    w: W,
) -> Result<(), ModelError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for (u, p) in graph.users().zip(profiles) {
        let k = p.upload_volume.to_string();
        let b = p.beta.to_string();
        match p.region {
            Some(r) => w.write_record([graph.label(u), &k, &b, &region_labels[r.0]]),
            None => w.write_record([graph.label(u), &k, &b]),
        }
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

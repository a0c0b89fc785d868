use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{KgEmbeddings, KgModel};
use crate::dense::{read_embeddings, write_embeddings};
use crate::error::{Error, Result};
use crate::kg::{EntityCatalog, EntityKind, RelationType};

const ENTITIES: &str = "entities.emb";
const RELATIONS: &str = "relations.emb";
const NORMALS: &str = "normals.emb";
const MANIFEST: &str = "manifest.txt";

/// Writes the matrices in the embedding binary format plus `manifest.txt`,
/// which maps entity ordinals to `kind<TAB>id<TAB>frozen<TAB>degree` and
/// lists the relation rows.
pub fn save_kg_embeddings(dir: impl AsRef<Path>, emb: &KgEmbeddings) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_embeddings(dir.join(ENTITIES), &emb.entities)?;
    write_embeddings(dir.join(RELATIONS), &emb.relations)?;
    if let Some(n) = &emb.normals {
        write_embeddings(dir.join(NORMALS), n)?;
    }
    let mut m = String::new();
    let _ = writeln!(m, "model\t{}", emb.model.name());
    let _ = writeln!(m, "dim\t{}", emb.dim());
    for (i, r) in RelationType::ALL.iter().enumerate() {
        let _ = writeln!(m, "relation\t{i}\t{}", r.name());
    }
    for (o, kind, id) in emb.catalog.entities() {
        let _ = writeln!(m, "entity\t{o}\t{kind}\t{id}\t{}\t{}", u8::from(emb.frozen[o as usize]), emb.degree[o as usize]);
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, m).map_err(|e| Error::io(&path, e))
}

pub fn load_kg_embeddings(dir: impl AsRef<Path>) -> Result<KgEmbeddings> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut model = None;
    let mut groups: [Vec<String>; 4] = Default::default();
    let mut rows: Vec<(EntityKind, String, bool, u32)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let bad = |msg: &str| Error::parse(&path, n + 1, msg.to_string());
        let cols: Vec<&str> = line.split('\t').collect();
        match cols.as_slice() {
            ["model", m] => model = Some(KgModel::parse(m).ok_or_else(|| bad("unknown model"))?),
            ["dim", _] => {}
            ["relation", i, name] => {
                let i: usize = i.parse().map_err(|_| bad("bad relation row"))?;
                if RelationType::ALL.get(i).map(|r| r.name()) != Some(*name) {
                    return Err(bad("relation rows out of order"));
                }
            }
            ["entity", o, kind, id, frozen, degree] => {
                let o: usize = o.parse().map_err(|_| bad("bad entity ordinal"))?;
                if o != rows.len() {
                    return Err(bad("entity ordinals are not contiguous"));
                }
                let kind = EntityKind::parse(kind).ok_or_else(|| bad("unknown entity kind"))?;
                let degree: u32 = degree.parse().map_err(|_| bad("bad degree"))?;
                groups[EntityKind::ALL.iter().position(|k| *k == kind).unwrap()].push(id.to_string());
                rows.push((kind, id.to_string(), *frozen == "1", degree));
            }
            _ => return Err(bad("unrecognized manifest line")),
        }
    }
    let model = model.ok_or_else(|| Error::parse(&path, 0, "manifest has no model line"))?;
    let catalog = EntityCatalog::from_groups(groups);
    for (o, (kind, id, _, _)) in rows.iter().enumerate() {
        if catalog.ordinal(*kind, id) != Some(o as u32) {
            return Err(Error::Data(format!("{}: entity order does not match the catalog order", path.display())));
        }
    }
    let entities = read_embeddings(dir.join(ENTITIES))?;
    let relations = read_embeddings(dir.join(RELATIONS))?;
    let normals = match model {
        KgModel::TransH => Some(read_embeddings(dir.join(NORMALS))?),
        KgModel::TransE => None,
    };
    if entities.count != rows.len() || relations.count != RelationType::ALL.len() || relations.dim != entities.dim {
        return Err(Error::Data(format!("{}: matrix shapes disagree with the manifest", dir.display())));
    }
    Ok(KgEmbeddings {
        model,
        entities,
        relations,
        normals,
        frozen: rows.iter().map(|r| r.2).collect(),
        degree: rows.iter().map(|r| r.3).collect(),
        catalog,
    })
}

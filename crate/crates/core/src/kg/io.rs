use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{EntityCatalog, EntityKind, RelationType, Triple};
use crate::error::{Error, Result};

/// One `kind:id<TAB>relation<TAB>kind:id` line per triple.
pub fn write_triples(path: impl AsRef<Path>, triples: &[Triple], catalog: &EntityCatalog) -> Result<()> {
    let path = path.as_ref();
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for t in triples {
        writeln!(
            w,
            "{}:{}\t{}\t{}:{}",
            catalog.kind(t.head),
            catalog.id(t.head),
            t.relation,
            catalog.kind(t.tail),
            catalog.id(t.tail)
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_triples(path: impl AsRef<Path>, catalog: &EntityCatalog) -> Result<Vec<Triple>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(path, n + 1, format!("expected 3 tab-separated fields, found {}", cols.len())));
        }
        let entity = |s: &str| -> Result<u32> {
            let (k, id) = s.split_once(':').ok_or_else(|| Error::parse(path, n + 1, format!("`{s}` is not kind:id")))?;
            let kind = EntityKind::parse(k).ok_or_else(|| Error::parse(path, n + 1, format!("unknown entity kind `{k}`")))?;
            catalog
                .ordinal(kind, id)
                .ok_or_else(|| Error::Data(format!("{}:{}: {kind} `{id}` is not in the catalog", path.display(), n + 1)))
        };
        let relation =
            RelationType::parse(cols[1]).ok_or_else(|| Error::parse(path, n + 1, format!("unknown relation `{}`", cols[1])))?;
        out.push(Triple::new(entity(cols[0])?, relation, entity(cols[2])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let cat = EntityCatalog::from_groups([vec!["u:1".into()], vec!["d1".into()], vec![], vec![]]);
        let t = vec![Triple::new(0, RelationType::Wrote, 1)];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("kg.tsv");
        write_triples(&p, &t, &cat).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "user:u:1\twrote\tdocument:d1\n");
        assert_eq!(read_triples(&p, &cat).unwrap(), t);
        fs::write(&p, "user:u:1\tlikes\tdocument:d1\n").unwrap();
        assert!(matches!(read_triples(&p, &cat), Err(Error::Parse { .. })));
        fs::write(&p, "user:nobody\twrote\tdocument:d1\n").unwrap();
        assert!(matches!(read_triples(&p, &cat), Err(Error::Data(_))));
    }
}

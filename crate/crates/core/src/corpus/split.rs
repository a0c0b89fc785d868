use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub cutoff_year: i32,
}

/// Document ordinals on each side of the cutoff. Test queries are generated
/// from `test`; the training side is everything published before the cutoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn chronological_split(corpus: &Corpus, spec: SplitSpec) -> Result<Split> {
    let (train, test): (Vec<usize>, Vec<usize>) =
        (0..corpus.len()).partition(|&o| corpus.get(o).year < spec.cutoff_year);
    if train.is_empty() {
        return Err(Error::Data(format!("cutoff {} leaves no training documents", spec.cutoff_year)));
    }
    if test.is_empty() {
        return Err(Error::Data(format!("cutoff {} leaves no test documents", spec.cutoff_year)));
    }
    Ok(Split { train, test })
}

/// Smallest publication year such that at least `q` of the corpus is
/// published before or in it.
pub fn percentile_year(corpus: &Corpus, q: f64) -> Option<i32> {
    let mut years: Vec<i32> = corpus.docs().iter().map(|d| d.year).collect();
    if years.is_empty() {
        return None;
    }
    years.sort_unstable();
    let idx = ((q.clamp(0.0, 1.0) * years.len() as f64).ceil() as usize).clamp(1, years.len()) - 1;
    Some(years[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(years: &[i32]) -> Corpus {
        let docs = years
            .iter()
            .enumerate()
            .map(|(i, &y)| Document {
                doc_id: format!("d{i}"),
                title: "t".into(),
                abstract_text: String::new(),
                author_ids: vec![],
                venue_id: None,
                year: y,
                references: vec![],
            })
            .collect();
        Corpus::new(docs).unwrap().0
    }

    #[test]
    fn partitions_by_year() {
        let c = corpus(&[2015, 2016, 2017, 2017]);
        let s = chronological_split(&c, SplitSpec { cutoff_year: 2017 }).unwrap();
        assert_eq!(s.train, vec![0, 1]);
        assert_eq!(s.test, vec![2, 3]);
    }

    #[test]
    fn cutoff_past_the_end_is_an_error() {
        let c = corpus(&[2015, 2016, 2017]);
        assert!(chronological_split(&c, SplitSpec { cutoff_year: 2018 }).is_err());
        assert!(chronological_split(&c, SplitSpec { cutoff_year: 2015 }).is_err());
    }

    #[test]
    fn percentile() {
        let c = corpus(&[2000, 2001, 2002, 2003, 2004, 2005, 2006, 2007, 2008, 2009]);
        assert_eq!(percentile_year(&c, 0.8), Some(2007));
        assert_eq!(percentile_year(&c, 1.0), Some(2009));
    }
}

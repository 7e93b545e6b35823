//! Reference data used by the extractors: lexicons, keywords, the permission
//! catalog, install buckets and the sentiment corpus.

use crate::error::Result;
use crate::model::{BucketTable, Manifest};
use crate::permissions::PermissionCatalog;
use crate::review::sentiment::load_corpus;
use crate::review::{bundled_coercive_keywords, bundled_corpus, IndicatorLexicons, Sentiment, WordList};

#[derive(Debug, Clone)]
pub struct Assets {
    pub lexicons: IndicatorLexicons,
    pub coercive_keywords: WordList,
    pub catalog: PermissionCatalog,
    pub buckets: BucketTable,
    pub sentiment_corpus: Vec<(Sentiment, String)>,
}

impl Assets {
    pub fn bundled() -> Self {
        Assets {
            lexicons: IndicatorLexicons::bundled(),
            coercive_keywords: bundled_coercive_keywords(),
            catalog: PermissionCatalog::bundled(),
            buckets: BucketTable::default(),
            sentiment_corpus: bundled_corpus(),
        }
    }

    /// Bundled defaults, replaced by whatever the manifest names.
    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        let mut a = Assets::bundled();
        if let Some(p) = &m.lexicons {
            a.lexicons = IndicatorLexicons::load(p)?;
        }
        if let Some(p) = &m.coercive_keywords {
            a.coercive_keywords = WordList::load(p)?;
        }
        if let Some(p) = &m.permission_catalog {
            a.catalog = PermissionCatalog::load(p)?;
        }
        if let Some(p) = &m.install_buckets {
            a.buckets = BucketTable::load(p)?;
        }
        if let Some(p) = &m.sentiment_corpus {
            a.sentiment_corpus = load_corpus(p)?;
        }
        Ok(a)
    }
}

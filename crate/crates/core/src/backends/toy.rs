use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{BackendError, Embedder, ImageRef};

/// Bag-of-tokens embedder: each lowercased whitespace token maps to a unit
/// vector seeded by a hash of the token, and a text embeds as the
/// normalized mean of its token vectors. Empty texts embed as zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToyEmbedder {
    pub dimension: usize,
    pub seed: u64,
}

impl ToyEmbedder {
    pub fn new(dimension: usize, seed: u64) -> Self {
        ToyEmbedder { dimension, seed }
    }

    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(token.as_bytes());
        let digest: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(digest);
        let mut v: Vec<f64> = (0..self.dimension).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut v);
        v
    }

    pub fn embed(&self, text: &str) -> Vec<f32> {
        let mut acc = vec![0.0f64; self.dimension];
        let mut count = 0usize;
        for token in text.split_whitespace() {
            let tv = self.token_vector(&token.to_lowercase());
            for (a, x) in acc.iter_mut().zip(&tv) {
                *a += x;
            }
            count += 1;
        }
        if count > 0 {
            for a in &mut acc {
                *a /= count as f64;
            }
            normalize(&mut acc);
        }
        acc.into_iter().map(|x| x as f32).collect()
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

impl Embedder for ToyEmbedder {
    fn embed_texts(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, BackendError> {
        Ok(texts.iter().map(|t| self.embed(t)).collect())
    }

    /// Images embed as their caption.
    fn embed_images(&self, images: &[ImageRef]) -> Result<Vec<Vec<f32>>, BackendError> {
        images
            .iter()
            .map(|im| {
                im.caption
                    .as_deref()
                    .map(|c| self.embed(c))
                    .ok_or_else(|| BackendError::Unsupported(format!("toy embedder needs a caption for image `{}`", im.id)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let t = ToyEmbedder::new(8, 42);
        assert_eq!(t.embed("dog"), t.embed("dog"));
        assert_ne!(t.embed("dog"), ToyEmbedder::new(8, 43).embed("dog"));
        assert_eq!(t.embed("Dog"), t.embed("dog"));
    }

    #[test]
    fn text_is_normalized_mean_of_tokens() {
        let t = ToyEmbedder::new(8, 42);
        let (a, b) = (t.token_vector("dog"), t.token_vector("cat"));
        let mut mean: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
        normalize(&mut mean);
        let want: Vec<f32> = mean.into_iter().map(|x| x as f32).collect();
        assert_eq!(t.embed("dog cat"), want);
    }

    #[test]
    fn empty_text_is_zero() {
        assert_eq!(ToyEmbedder::new(4, 1).embed("  "), vec![0.0; 4]);
    }

    #[test]
    fn image_embeds_as_caption() {
        let t = ToyEmbedder::new(8, 42);
        let im = ImageRef {
            id: "i".into(),
            media: None,
            caption: Some("a dog".into()),
        };
        assert_eq!(t.embed_images(&[im]).unwrap()[0], t.embed("a dog"));
        let bare = ImageRef {
            id: "j".into(),
            media: None,
            caption: None,
        };
        assert!(t.embed_images(&[bare]).is_err());
    }
}

//! Helpers shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sl2tree::sl2::Mat2;
use sl2tree::valued_field::Field;
use sl2tree::word::{Letter, Word};

pub fn mat(p: u64, s: &str) -> Mat2 {
    Mat2::parse(Field::Qp(p), s).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A freely reduced word with length drawn from `lo..=hi`.
pub fn random_word(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Word {
    let len = rng.gen_range(lo..=hi);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::ALL[rng.gen_range(0..4)];
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word::from_letters(letters)
}

/// `[[p, p−1], [−1/p, 1/p²]]`, `[[2/p⁴, p³], [1/p³, p⁴]]`.
pub fn one_iteration_pair(p: u64) -> (Mat2, Mat2) {
    (
        mat(p, &format!("[[{p},{}],[-1/{p},1/{p}^2]]", p - 1)),
        mat(p, &format!("[[2/{p}^4,{p}^3],[1/{p}^3,{p}^4]]")),
    )
}

/// `[[p³, 0], [0, p⁻³]]`, `[[2/p^{3r+1}, p³], [1/p³, p^{3r+1}]]`.
pub fn iteration_family(p: u64, r: u32) -> (Mat2, Mat2) {
    let e = 3 * r + 1;
    (
        mat(p, &format!("[[{p}^3,0],[0,1/{p}^3]]")),
        mat(p, &format!("[[2/{p}^{e},{p}^3],[1/{p}^3,{p}^{e}]]")),
    )
}

/// Random element of SL₂(ℚₚ) as a product of elementary matrices.
pub fn random_sl2(rng: &mut ChaCha8Rng, p: u64, steps: usize) -> Mat2 {
    let f = Field::Qp(p);
    let mut g = Mat2::identity(f);
    for _ in 0..steps {
        let num = rng.gen_range(-6i64..=6);
        let e = rng.gen_range(-2i64..=2);
        let x = f.from_int(num) * f.uniformizer_pow(e);
        let m = if rng.gen_bool(0.5) { Mat2::upper(&x) } else { Mat2::lower(&x) };
        g = g.mul(&m);
    }
    g
}

//! Traces, eigenvalue ratios and translation lengths of words in SL(2) and
//! SL(3) representations.

use logcompact::charvar::{
    eigen_ratio, evaluate_word, fixed_points, is_proximal, trace_function, translation_length,
    word_translation_length, Representation, Word,
};
use logcompact::linalg::Matrix;
use logcompact::surface::TraceTriple;

fn main() {
    let rho = TraceTriple::markov().representation().unwrap();
    for w in ["a", "b", "ab", "aB", "aab", "abAB"] {
        let w = Word::parse(w).unwrap();
        let tr = trace_function(&rho, &w).unwrap();
        let ell = word_translation_length(&rho, &w);
        println!("{w:>5}: trace {tr:>8.4}  length {ell:.6?}");
    }

    let m = Matrix::from_array([[2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]]);
    let m = m.scaled(1.0 / m.det().cbrt());
    let sl3 = Representation::from_pairs(3, vec![('a', m)]).unwrap();
    let g = evaluate_word(&sl3, &Word::parse("aa").unwrap()).unwrap();
    println!(
        "SL(3): aa has e = {:.4}, length {:.4}, proximal {:?}",
        eigen_ratio(&g).unwrap(),
        translation_length(&g).unwrap(),
        is_proximal(&g).unwrap()
    );
    let fp = fixed_points(&g).unwrap();
    println!("attracting line {:.4?}", fp.attracting);
}

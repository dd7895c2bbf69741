//! Prime tables against a plain sieve of Eratosthenes.

use heckelab::kfull::FactorTable;

fn eratosthenes(n: usize) -> Vec<usize> {
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

#[test]
fn prime_count_to_one_million() {
    let table = FactorTable::new(1_000_000).unwrap();
    let expected = eratosthenes(1_000_000);
    assert_eq!(expected.len(), 78_498);
    let got: Vec<usize> = table.primes_up_to(1_000_000).iter().map(|&p| p as usize).collect();
    assert_eq!(got, expected);
}

#[test]
fn smallest_factor_agrees_with_trial_division() {
    let table = FactorTable::new(20_000).unwrap();
    for n in 2..=20_000usize {
        let spf = (2..).find(|d| n % d == 0).unwrap();
        assert_eq!(table.spf(n), spf, "n = {n}");
    }
}

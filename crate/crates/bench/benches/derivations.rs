use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use akaprime_bench::{challenge, ck_ik, credential, vector, IDENTITY, SNN};
use akaprime_core::crypto::{
    derive_ck_ik_prime, derive_k_seaf, derive_master_keys, generate_av, hashed_response, prf_prime, usim_functions,
    verify_autn,
};
use akaprime_core::wire::eap::{decode_eap, encode_eap};

fn crypto(c: &mut Criterion) {
    let cred = credential();
    let av = vector();
    let (ck, ik) = ck_ik();

    c.bench_function("usim_functions", |b| b.iter(|| usim_functions(black_box(&cred), black_box(&av.rand))));
    c.bench_function("verify_autn", |b| b.iter(|| verify_autn(&cred.k, black_box(&av.rand), black_box(&av.autn))));
    c.bench_function("generate_av", |b| b.iter(|| generate_av(black_box(&cred), SNN, b"bench")));
    c.bench_function("derive_ck_ik_prime", |b| {
        b.iter(|| derive_ck_ik_prime(black_box(&ck), black_box(&ik), SNN, &av.autn.sqn_xor_ak))
    });
    c.bench_function("prf_prime_208", |b| b.iter(|| prf_prime(black_box(&[7u8; 32]), b"EAP-AKA'", 208)));
    c.bench_function("derive_master_keys", |b| {
        b.iter(|| derive_master_keys(black_box(&av.ck_prime), &av.ik_prime, IDENTITY, &av.rand, &av.autn))
    });
    c.bench_function("derive_k_seaf", |b| b.iter(|| derive_k_seaf(black_box(&[3u8; 32]), SNN)));
    c.bench_function("hashed_response", |b| b.iter(|| hashed_response(black_box(&av.rand), &av.xres)));
}

fn codec(c: &mut Criterion) {
    let p = challenge();
    let raw = encode_eap(&p).unwrap();
    c.bench_function("encode_challenge", |b| b.iter(|| encode_eap(black_box(&p))));
    c.bench_function("decode_challenge", |b| b.iter(|| decode_eap(black_box(&raw))));
}

criterion_group!(benches, crypto, codec);
criterion_main!(benches);

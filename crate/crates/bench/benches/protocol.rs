use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use wia_bench::{allowlist_of, lossless_radio};
use wia_core::wire::{arq_send, crc16_ccitt_false, decode_frame, encode_frame, ArqPolicy};
use wia_core::{authenticate, decode_command, AttemptState, AuthPolicy, Frame, Timestamp};

fn crc(c: &mut Criterion) {
    let mut g = c.benchmark_group("crc16");
    for len in [9usize, 54] {
        let data: Vec<u8> = (0..len as u8).collect();
        g.throughput(Throughput::Bytes(len as u64));
        g.bench_with_input(BenchmarkId::from_parameter(len), &data, |b, d| {
            b.iter(|| crc16_ccitt_false(black_box(d)))
        });
    }
    g.finish();
}

fn frame_codec(c: &mut Criterion) {
    let frame = Frame::cmd(7, "motor_off");
    let bytes = encode_frame(&frame).unwrap();
    c.bench_function("frame/encode", |b| {
        b.iter(|| encode_frame(black_box(&frame)))
    });
    c.bench_function("frame/decode", |b| {
        b.iter(|| decode_frame(black_box(&bytes)))
    });
}

fn admission(c: &mut Criterion) {
    let policy = AuthPolicy::default();
    let mut g = c.benchmark_group("authenticate");
    for n in [10u16, 1000] {
        let (al, stranger) = allowlist_of(n);
        let member = *al.iter().next().unwrap().0;
        g.bench_with_input(BenchmarkId::new("granted", n), &al, |b, al| {
            let mut state = AttemptState::new();
            b.iter(|| {
                authenticate(
                    black_box(member),
                    al,
                    &mut state,
                    &policy,
                    Timestamp::from_millis(0),
                )
            })
        });
        g.bench_with_input(BenchmarkId::new("denied", n), &al, |b, al| {
            b.iter(|| {
                let mut state = AttemptState::new();
                authenticate(
                    black_box(stranger),
                    al,
                    &mut state,
                    &policy,
                    Timestamp::from_millis(0),
                )
            })
        });
    }
    g.finish();
}

fn arq_exchange(c: &mut Criterion) {
    let cmd = decode_command("led1_on").unwrap();
    let policy = ArqPolicy::default();
    let mut radio = lossless_radio();
    let mut seq = 0u8;
    c.bench_function("arq/lossless_exchange", |b| {
        b.iter(|| {
            seq = seq.wrapping_add(1);
            arq_send(cmd, seq, &mut radio, &policy)
        })
    });
}

criterion_group!(benches, crc, frame_codec, admission, arq_exchange);
criterion_main!(benches);

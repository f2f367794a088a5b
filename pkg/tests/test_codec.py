import json
import math

import numpy as np
import pytest

from covertlink import rng
from covertlink.bounds import BPSK, GAUSSIAN, SPARSE
from covertlink.codec import (
    MAX_MESSAGE_BITS,
    Codebook,
    CodebookSpec,
    EmptyScheduleError,
    SecretKey,
    codebook_from_json,
    codebook_to_json,
    decode_hard_decision,
    decode_min_distance,
    encode,
    generate_codebook,
    key_length,
    random_key,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        CodebookSpec(GAUSSIAN, n=8, message_bits=MAX_MESSAGE_BITS + 1, power=0.1)
    with pytest.raises(ValueError):
        CodebookSpec(GAUSSIAN, n=8, message_bits=0, power=0.1)
    with pytest.raises(ValueError):
        CodebookSpec(GAUSSIAN, n=0, message_bits=2, power=0.1)
    with pytest.raises(ValueError):
        CodebookSpec(BPSK, n=8, message_bits=2, power=0.1, tau=0.5)
    with pytest.raises(ValueError):
        CodebookSpec(SPARSE, n=8, message_bits=2, power=0.1, tau=0.0)
    with pytest.raises(ValueError):
        CodebookSpec(BPSK, n=8, message_bits=2, power=-0.1)

    spec = CodebookSpec(BPSK, n=8, message_bits=3, power=0.25)
    assert spec.message_count == 8
    assert spec.amplitude == 0.5
    with pytest.raises(ValueError):
        _ = CodebookSpec(GAUSSIAN, n=8, message_bits=3, power=0.25).amplitude


def test_gaussian_codebook_power_concentration():
    spec = CodebookSpec(GAUSSIAN, n=512, message_bits=6, power=0.01)
    cb = generate_codebook(spec, seed=101)
    assert cb.codewords.shape == (64, 512)
    # per-entry variance P: the empirical mean square sits within 5 sigma
    mean_sq = float(np.mean(cb.codewords**2))
    slack = 5.0 * math.sqrt(2.0 / (512 * 64)) * 0.01
    assert abs(mean_sq - 0.01) <= slack
    assert not np.array_equal(cb.codewords[0], cb.codewords[1])


def test_antipodal_codebook_alphabet():
    spec = CodebookSpec(BPSK, n=128, message_bits=4, power=0.25)
    cb = generate_codebook(spec, seed=3)
    assert set(np.unique(cb.codewords)) == {-0.5, 0.5}
    frac = float(np.mean(cb.codewords > 0))
    assert abs(frac - 0.5) <= 5.0 * math.sqrt(0.25 / cb.codewords.size)


def test_sparse_codebook_schedule():
    spec = CodebookSpec(SPARSE, n=4096, message_bits=3, power=0.25, tau=0.1)
    cb = generate_codebook(spec, seed=17)
    sched = cb.schedule
    assert sched[0] >= 0 and sched[-1] < 4096
    assert np.all(np.diff(sched) > 0)
    assert cb.codewords.shape == (8, len(sched))
    expected = 4096 * 0.1
    assert abs(len(sched) - expected) <= 5.0 * math.sqrt(4096 * 0.1 * 0.9)
    assert cb.realized_tau == len(sched) / 4096
    assert cb.occupied_length == len(sched)


def test_generation_is_deterministic():
    spec = CodebookSpec(GAUSSIAN, n=64, message_bits=4, power=0.3)
    a = generate_codebook(spec, seed=5)
    b = generate_codebook(spec, seed=5)
    c = generate_codebook(spec, seed=6)
    assert np.array_equal(a.codewords, b.codewords)
    assert not np.array_equal(a.codewords, c.codewords)


def test_noiseless_roundtrip_all_schemes():
    for scheme, decoder, keyed in (
        (GAUSSIAN, decode_min_distance, False),
        (BPSK, decode_hard_decision, True),
        (SPARSE, decode_hard_decision, True),
    ):
        tau = 0.3 if scheme == SPARSE else 1.0
        spec = CodebookSpec(scheme, n=96, message_bits=4, power=0.4, tau=tau)
        cb = generate_codebook(spec, seed=23)
        key = random_key(key_length(cb), seed=29) if keyed else None
        for m in range(spec.message_count):
            x = encode(cb, m, key)
            assert x.shape == (96,)
            assert decoder(cb, x, key) == m
            if keyed:
                assert decode_min_distance(cb, x, key) == m


def test_sparse_encode_scatters_on_schedule():
    spec = CodebookSpec(SPARSE, n=200, message_bits=2, power=0.25, tau=0.2)
    cb = generate_codebook(spec, seed=31)
    x = encode(cb, 1)
    off = np.setdiff1d(np.arange(200), cb.schedule)
    assert np.all(x[off] == 0.0)
    assert np.all(np.abs(x[cb.schedule]) == 0.5)


def test_keying_scrambles_the_wire_signal():
    spec = CodebookSpec(BPSK, n=64, message_bits=3, power=0.25)
    cb = generate_codebook(spec, seed=41)
    key = random_key(key_length(cb), seed=43)
    plain = encode(cb, 5)
    keyed = encode(cb, 5, key)
    assert not np.array_equal(plain, keyed)
    assert decode_hard_decision(cb, keyed, key) == 5
    # an eavesdropper without the key sees a scrambled word
    assert decode_hard_decision(cb, keyed) != 5 or np.array_equal(plain, keyed)


def test_key_contracts():
    spec = CodebookSpec(GAUSSIAN, n=32, message_bits=2, power=0.1)
    cb = generate_codebook(spec, seed=1)
    with pytest.raises(ValueError):
        key_length(cb)
    with pytest.raises(ValueError):
        encode(cb, 0, SecretKey(np.zeros(32, dtype=np.int64)))

    bspec = CodebookSpec(BPSK, n=32, message_bits=2, power=0.1)
    bcb = generate_codebook(bspec, seed=1)
    assert key_length(bcb) == 32
    with pytest.raises(ValueError):
        encode(bcb, 0, random_key(16, seed=2))
    with pytest.raises(ValueError):
        encode(bcb, 4, None)  # out of range
    with pytest.raises(ValueError):
        SecretKey(np.array([0, 2, 1]))
    with pytest.raises(ValueError):
        SecretKey(np.zeros((4, 4), dtype=np.int64))


def test_random_key_balance_and_determinism():
    key = random_key(10_000, seed=77)
    assert len(key) == 10_000
    assert set(np.unique(key.bits)) <= {0, 1}
    assert abs(float(np.mean(key.sign_flips))) <= 0.025
    assert np.array_equal(key.bits, random_key(10_000, seed=77).bits)


def test_batched_decoding():
    spec = CodebookSpec(BPSK, n=48, message_bits=3, power=0.25)
    cb = generate_codebook(spec, seed=51)
    msgs = np.arange(8)
    batch = np.stack([encode(cb, int(m)) for m in msgs])
    got_soft = decode_min_distance(cb, batch)
    got_hard = decode_hard_decision(cb, batch)
    assert np.array_equal(got_soft, msgs)
    assert np.array_equal(got_hard, msgs)
    key = random_key(48, seed=52)
    with pytest.raises(ValueError):
        decode_min_distance(cb, batch, key)


def test_ties_resolve_to_lowest_index():
    spec = CodebookSpec(BPSK, n=2, message_bits=2, power=0.25)
    words = np.array(
        [[0.5, 0.5], [-0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]
    )
    cb = Codebook(spec, seed=0, codewords=words)
    # message 2 is a duplicate row of message 0: both decoders must pick 0
    y = np.array([0.5, 0.5])
    assert decode_min_distance(cb, y) == 0
    assert decode_hard_decision(cb, y) == 0
    # equidistant between two rows, again lowest index wins
    mid = np.array([0.0, -0.5])  # slicer sends 0 to +a
    assert decode_hard_decision(cb, mid) in (0, 1, 3)
    assert decode_hard_decision(cb, mid) == min(
        (m for m in range(4)), key=lambda m: (np.sum((words[m] < 0) != (mid < 0)), m)
    )


def test_single_chip_flip_is_corrected():
    spec = CodebookSpec(BPSK, n=16, message_bits=1, power=1.0)
    cb = generate_codebook(spec, seed=61)
    sep = int(np.sum(cb.codewords[0] != cb.codewords[1]))
    assert sep >= 3  # the drawn pair is far enough apart to correct one flip
    for m in (0, 1):
        ref = encode(cb, m)
        for i in range(16):
            y = ref.copy()
            y[i] = -y[i]
            assert decode_hard_decision(cb, y) == m
            assert decode_min_distance(cb, y) == m


def test_hard_decision_is_no_better_than_soft():
    spec = CodebookSpec(BPSK, n=32, message_bits=4, power=0.25)
    cb = generate_codebook(spec, seed=71)
    gen = rng.stream(73, "codec_hard_vs_soft")
    trials = 3_000
    msgs = gen.integers(0, 16, size=trials)
    clean = cb.codewords[msgs]
    noisy = clean + rng.normal(gen, (trials, 32), sd=1.2)
    soft = decode_min_distance(cb, noisy)
    hard = decode_hard_decision(cb, noisy)
    p_soft = float(np.mean(soft != msgs))
    p_hard = float(np.mean(hard != msgs))
    ci = 2.576 * math.sqrt(0.25 / trials)
    assert p_hard >= p_soft - 3.0 * ci


def test_json_roundtrip_is_lossless():
    spec = CodebookSpec(SPARSE, n=300, message_bits=3, power=0.16, tau=0.25)
    cb = generate_codebook(spec, seed=83)
    text = codebook_to_json(cb)
    parsed = json.loads(text)  # valid JSON document
    assert parsed["scheme"] == SPARSE
    back = codebook_from_json(text)
    assert back.spec == cb.spec
    assert back.seed == cb.seed
    assert np.array_equal(back.codewords, cb.codewords)
    assert np.array_equal(back.schedule, cb.schedule)

    gspec = CodebookSpec(GAUSSIAN, n=40, message_bits=2, power=0.3)
    gcb = generate_codebook(gspec, seed=89)
    gback = codebook_from_json(codebook_to_json(gcb))
    # bit-exact floats through the text round-trip
    assert gback.codewords.tobytes() == gcb.codewords.tobytes()
    assert gback.schedule is None


def test_codebook_validation():
    spec = CodebookSpec(SPARSE, n=64, message_bits=2, power=0.25, tau=0.2)
    with pytest.raises(EmptyScheduleError):
        Codebook(spec, seed=0, codewords=np.zeros((4, 0)), schedule=np.array([], dtype=np.int64))
    with pytest.raises(EmptyScheduleError):
        Codebook(spec, seed=0, codewords=np.zeros((4, 0)), schedule=None)
    with pytest.raises(ValueError):
        Codebook(
            spec,
            seed=0,
            codewords=np.full((4, 2), 0.5),
            schedule=np.array([5, 3]),  # not increasing
        )
    bspec = CodebookSpec(BPSK, n=4, message_bits=1, power=0.25)
    with pytest.raises(ValueError):
        Codebook(bspec, seed=0, codewords=np.full((2, 4), 0.3))  # wrong alphabet


def test_observation_length_check():
    spec = CodebookSpec(BPSK, n=16, message_bits=2, power=0.25)
    cb = generate_codebook(spec, seed=91)
    with pytest.raises(ValueError):
        decode_min_distance(cb, np.zeros(15))

#!/usr/bin/env python3
"""Standalone reference for the akaprime derivations.

Reads a JSON list of {"op": name, "inputs": {...}} from a file (or stdin)
and prints one JSON object of hex outputs per line. Uses only hashlib/hmac
so it shares no code with the Rust implementation.

All byte inputs are hex strings; sqn is an integer; snn/identity/label
are text (label may also be given as hex via "label_hex").
"""

import hashlib
import hmac
import json
import sys


def h(key, msg):
    return hmac.new(key, msg, hashlib.sha256).digest()


def b(x):
    return bytes.fromhex(x)


def sqn_bytes(sqn):
    assert 0 <= sqn < 2 ** 48
    return sqn.to_bytes(6, "big")


def usim_functions(k, rand, sqn, amf):
    return {
        "mac_a": h(k, b"\x01" + rand + sqn_bytes(sqn) + amf)[:8],
        "xres": h(k, b"\x02" + rand)[:8],
        "ck": h(k, b"\x03" + rand)[:16],
        "ik": h(k, b"\x04" + rand)[:16],
        "ak": h(k, b"\x05" + rand)[:6],
    }


def build_autn(sqn, ak, amf, mac_a):
    sx = bytes(x ^ y for x, y in zip(sqn_bytes(sqn), ak))
    return sx + amf + mac_a


def ck_ik_prime(ck, ik, snn, sqn_xor_ak):
    out = h(ck + ik, b"\x20" + snn.encode() + sqn_xor_ak)
    return out[:16], out[16:32]


def prf_prime(key, label, out_len):
    assert out_len <= 255 * 32
    out = b""
    prev = b""
    i = 1
    while len(out) < out_len:
        prev = h(key, prev + label + bytes([i]))
        out += prev
        i += 1
    return out[:out_len]


def master_keys(ck_p, ik_p, identity, rand, autn):
    mk = prf_prime(ik_p + ck_p, b"EAP-AKA'" + identity.encode(), 208)
    return {
        "mk": mk,
        "k_encr": mk[0:16],
        "k_aut": mk[16:48],
        "k_re": mk[48:80],
        "msk": mk[80:144],
        "emsk": mk[144:208],
        "k_ausf": mk[144:176],
        "session_id": b"\x32" + rand + autn,
    }


def k_seaf(k_ausf, snn):
    return h(k_ausf, b"\x6c" + snn.encode())


def k_ausf_5g(ck_p, ik_p, snn, sqn_xor_ak):
    return h(ck_p + ik_p, b"\x6a" + snn.encode() + sqn_xor_ak)


def hashed_response(rand, res):
    return hashlib.sha256(rand + res).digest()[:16]


def av_rand(seed, sqn):
    return h(seed, b"AV-RAND" + sqn_bytes(sqn))[:16]


def generate_av(k, sqn, amf, snn, seed):
    rand = av_rand(seed, sqn)
    u = usim_functions(k, rand, sqn, amf)
    autn = build_autn(sqn, u["ak"], amf, u["mac_a"])
    ck_p, ik_p = ck_ik_prime(u["ck"], u["ik"], snn, autn[:6])
    return {
        "rand": rand,
        "autn": autn,
        "xres": u["xres"],
        "ck_prime": ck_p,
        "ik_prime": ik_p,
        "next_sqn": sqn + 1,
    }


def suci_keystream(home_key, nonce, n):
    out = h(home_key, b"suci-ks" + nonce)
    i = 1
    while len(out) < n:
        out += h(home_key, b"suci-ks" + nonce + bytes([i]))
        i += 1
    return out[:n]


def conceal_sym_test(home_key, nonce, msin):
    pt = msin.encode()
    ct = bytes(x ^ y for x, y in zip(pt, suci_keystream(home_key, nonce, len(pt))))
    tag = h(home_key, b"suci-tag" + nonce + ct)[:16]
    return {"ciphertext": ct, "tag": tag}


def eap_attr(kind, value):
    body = len(value).to_bytes(2, "big") + value
    total = 2 + len(body)
    pad = (-total) % 4
    return bytes([kind, (total + pad) // 4]) + body + b"\x00" * pad


def eap_packet(code, ident, subtype, attrs):
    body = bytes([0x32, subtype, 0, 0]) + b"".join(eap_attr(k, v) for k, v in attrs)
    return bytes([code, ident]) + (4 + len(body)).to_bytes(2, "big") + body


def seal_mac(k_aut, packet):
    return h(k_aut, packet)[:16]


def run(op, i):
    if op == "usim_functions":
        return usim_functions(b(i["k"]), b(i["rand"]), i["sqn"], b(i["amf_field"]))
    if op == "build_autn":
        return {"autn": build_autn(i["sqn"], b(i["ak"]), b(i["amf_field"]), b(i["mac_a"]))}
    if op == "derive_ck_ik_prime":
        ck_p, ik_p = ck_ik_prime(b(i["ck"]), b(i["ik"]), i["snn"], b(i["sqn_xor_ak"]))
        return {"ck_prime": ck_p, "ik_prime": ik_p}
    if op == "prf_prime":
        label = b(i["label_hex"]) if "label_hex" in i else i["label"].encode()
        return {"out": prf_prime(b(i["key"]), label, i["out_len"])}
    if op == "derive_master_keys":
        return master_keys(b(i["ck_prime"]), b(i["ik_prime"]), i["identity"], b(i["rand"]), b(i["autn"]))
    if op == "derive_k_seaf":
        return {"k_seaf": k_seaf(b(i["k_ausf"]), i["snn"])}
    if op == "derive_k_ausf_5g":
        return {"k_ausf": k_ausf_5g(b(i["ck_prime"]), b(i["ik_prime"]), i["snn"], b(i["sqn_xor_ak"]))}
    if op == "hashed_response":
        return {"out": hashed_response(b(i["rand"]), b(i["res"]))}
    if op == "generate_av":
        return generate_av(b(i["k"]), i["sqn"], b(i["amf_field"]), i["snn"], b(i["seed"]))
    if op == "conceal_sym_test":
        return conceal_sym_test(b(i["home_key"]), b(i["nonce"]), i["msin"])
    if op == "seal_mac_challenge":
        # AKA'-Challenge request: AT_RAND, AT_AUTN, AT_KDF, AT_KDF_INPUT, AT_MAC (zeroed)
        attrs = [
            (1, b(i["rand"])),
            (2, b(i["autn"])),
            (24, b"\x00\x01"),
            (23, i["snn"].encode()),
            (11, b"\x00" * 16),
        ]
        pkt = eap_packet(1, i["identifier"], 1, attrs)
        return {"packet": pkt, "mac": seal_mac(b(i["k_aut"]), pkt)}
    raise ValueError("unknown op " + op)


def to_hex(out):
    return {k: (v.hex() if isinstance(v, bytes) else v) for k, v in out.items()}


def main():
    src = open(sys.argv[1]) if len(sys.argv) > 1 else sys.stdin
    for item in json.load(src):
        print(json.dumps(to_hex(run(item["op"], item["inputs"])), sort_keys=True))


if __name__ == "__main__":
    main()

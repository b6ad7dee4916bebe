#!/usr/bin/env python3
"""Convert torchvision VGG19 weights into the swtex checkpoint format (.swtw).

Usage:
    convert_vgg19_torchvision.py OUT.swtw                 # torchvision download
    convert_vgg19_torchvision.py OUT.swtw --state-dict vgg19.pth

Only the 16 convolutions of `features` are kept.
"""
import argparse
import struct
import sys

BLOCKS = [2, 2, 4, 4, 4]


def conv_tags():
    for b, n in enumerate(BLOCKS, start=1):
        for i in range(1, n + 1):
            yield f"conv{b}_{i}"


def load_state_dict(path):
    import torch

    if path:
        return torch.load(path, map_location="cpu")
    import torchvision

    model = torchvision.models.vgg19(weights=torchvision.models.VGG19_Weights.IMAGENET1K_V1)
    return model.state_dict()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--state-dict", default=None, help="local torchvision state_dict")
    ap.add_argument("--id", default="vgg19-torchvision-imagenet1k-v1")
    args = ap.parse_args()

    sd = load_state_dict(args.state_dict)
    conv_keys = sorted(
        {k.rsplit(".", 1)[0] for k in sd if k.startswith("features.") and k.endswith(".weight")},
        key=lambda k: int(k.split(".")[1]),
    )
    if len(conv_keys) != 16:
        sys.exit(f"expected 16 convolutions, found {len(conv_keys)}")

    with open(args.out, "wb") as f:
        f.write(b"SWTXW001")
        ident = args.id.encode()
        f.write(struct.pack("<I", len(ident)) + ident)
        f.write(struct.pack("<I", 16))
        for tag, key in zip(conv_tags(), conv_keys):
            w = sd[key + ".weight"].float().contiguous().numpy()
            bias = sd[key + ".bias"].float().contiguous().numpy()
            out_c, in_c, kh, kw = w.shape
            t = tag.encode()
            f.write(struct.pack("<I", len(t)) + t)
            f.write(struct.pack("<IIII", out_c, in_c, kh, kw))
            f.write(w.astype("<f4").tobytes())
            f.write(bias.astype("<f4").tobytes())
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

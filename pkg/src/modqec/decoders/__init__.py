from .brute import brute_force_decode
from .graph import Decoding, MatchingGraph, path_qubits
from .mwpm import mwpm_decode
from .uf import uf_decode

DECODERS = {"uf": uf_decode, "mwpm": mwpm_decode}


def decode(name: str, graph: MatchingGraph) -> Decoding:
    try:
        return DECODERS[name](graph)
    except KeyError:
        raise ValueError(f"unknown decoder {name!r}") from None


__all__ = ["DECODERS", "Decoding", "MatchingGraph", "brute_force_decode", "decode",
           "mwpm_decode", "path_qubits", "uf_decode"]

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metgeo/field.hpp"

namespace metgeo {

// Field files come in two wire formats with identical content:
//  - text: a JSON document with keys n (fiber dim), dims, extent, gref
//    ("identity" or {"per_cell": [...]}), data (row-major list of
//    n(n+1)/2-entry tensors) and an optional mask of row-major 0/1 flags
//    for deflated cells.  Numbers use shortest round-trip decimals, so a
//    write/read cycle is bit-exact.
//  - binary: "MGF1" magic, version byte, header (n, dim, gref kind,
//    little-endian int32 res, float64 extent, mask flag), then raw
//    little-endian float64 payload in the same order as the text format.
enum class FileFormat { text, binary };

SemimetricField read_field(const std::string& path);
void write_field(const SemimetricField& f, const std::string& path,
                 FileFormat format = FileFormat::text);

// 0/1 cell flags from a JSON array (or {"mask": [...]}) of length n_cells.
CellMask read_mask(const std::string& path, std::size_t n_cells);

// Sequence manifest: JSON {"terms": [paths...], "limit": path (optional)}.
// Relative paths are resolved against the manifest's directory.
struct SequenceManifest {
  std::vector<std::string> terms;
  std::optional<std::string> limit;
};
SequenceManifest read_manifest(const std::string& path);

}  // namespace metgeo

#include "metgeo/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace metgeo {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'M', 'G', 'F', '1'};
constexpr std::uint8_t kVersion = 1;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
  return doc;
}

void check_extent(const json& extent, const std::string& path) {
  const json expected = json::array({json::array({-1.0, 1.0}), json::array({-1.0, 1.0})});
  if (extent != expected)
    throw IoError("'" + path + "': unsupported extent (only [[-1,1],[-1,1]] charts)");
}

SemimetricField field_from_parts(int n, std::array<int, 2> res, GrefSpec gref,
                                 std::vector<std::vector<double>> comps,
                                 const std::vector<std::uint8_t>& mask, const std::string& path) {
  DomainPtr dom;
  try {
    dom = make_grid(2, res, std::move(gref), n);
  } catch (const Error& e) {
    throw IoError("'" + path + "': " + e.what());
  }
  if (!mask.empty()) {
    // Masked cells are deflated regardless of their stored entries.
    for (std::size_t j = 0; j < mask.size(); ++j)
      if (mask[j])
        for (std::vector<double>& comp : comps) comp[j] = 0.0;
  }
  try {
    return SemimetricField::from_components(std::move(dom), std::move(comps));
  } catch (const Error& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

SemimetricField read_text(const std::string& path) {
  const json doc = load_json(path);
  try {
    const int n = doc.at("n").get<int>();
    const auto dims = doc.at("dims").get<std::vector<int>>();
    if (dims.size() != 2) throw IoError("'" + path + "': dims must have 2 entries");
    check_extent(doc.at("extent"), path);

    GrefSpec gref;
    const json& gj = doc.at("gref");
    if (gj.is_string()) {
      if (gj.get<std::string>() != "identity")
        throw IoError("'" + path + "': unknown gref '" + gj.get<std::string>() + "'");
    } else if (gj.is_object() && gj.contains("per_cell")) {
      const auto rows = gj.at("per_cell").get<std::vector<std::vector<double>>>();
      std::vector<SymTensor> cells;
      cells.reserve(rows.size());
      for (const std::vector<double>& row : rows) {
        if (row.size() != 3) throw IoError("'" + path + "': gref tensors need 3 entries");
        SymTensor g(2);
        g[0] = row[0];
        g[1] = row[1];
        g[2] = row[2];
        cells.push_back(g);
      }
      gref = GrefSpec::make_per_cell(std::move(cells));
    } else {
      throw IoError("'" + path + "': gref must be \"identity\" or {\"per_cell\": [...]}");
    }

    const int m = packed_size(n);
    const auto rows = doc.at("data").get<std::vector<std::vector<double>>>();
    const std::size_t nc = static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]);
    if (rows.size() != nc) throw IoError("'" + path + "': data length != product(dims)");
    std::vector<std::vector<double>> comps(static_cast<std::size_t>(m),
                                           std::vector<double>(nc));
    for (std::size_t j = 0; j < nc; ++j) {
      if (rows[j].size() != static_cast<std::size_t>(m))
        throw IoError("'" + path + "': tensor entry list has wrong length");
      for (int k = 0; k < m; ++k) comps[static_cast<std::size_t>(k)][j] = rows[j][static_cast<std::size_t>(k)];
    }

    std::vector<std::uint8_t> mask;
    if (doc.contains("mask")) {
      mask = doc.at("mask").get<std::vector<std::uint8_t>>();
      if (mask.size() != nc) throw IoError("'" + path + "': mask length != product(dims)");
    }
    return field_from_parts(n, {dims[0], dims[1]}, std::move(gref), std::move(comps), mask, path);
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("'" + path + "': truncated binary field file");
  return v;
}

void put_doubles(std::ofstream& out, const double* p, std::size_t count) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

void get_doubles(std::ifstream& in, double* p, std::size_t count, const std::string& path) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw IoError("'" + path + "': truncated binary field file");
}

SemimetricField read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("'" + path + "': not a binary field file");
  if (get<std::uint8_t>(in, path) != kVersion)
    throw IoError("'" + path + "': unsupported binary version");
  const int n = get<std::uint8_t>(in, path);
  const int dim = get<std::uint8_t>(in, path);
  if (dim != 2) throw IoError("'" + path + "': unsupported chart dimension");
  const std::uint8_t gref_kind = get<std::uint8_t>(in, path);
  const std::int32_t rx = get<std::int32_t>(in, path);
  const std::int32_t ry = get<std::int32_t>(in, path);
  double extent[4];
  get_doubles(in, extent, 4, path);
  if (extent[0] != -1.0 || extent[1] != 1.0 || extent[2] != -1.0 || extent[3] != 1.0)
    throw IoError("'" + path + "': unsupported extent (only [[-1,1],[-1,1]] charts)");
  const std::uint8_t has_mask = get<std::uint8_t>(in, path);
  if (rx <= 0 || ry <= 0) throw IoError("'" + path + "': bad resolution");
  const std::size_t nc = static_cast<std::size_t>(rx) * static_cast<std::size_t>(ry);

  GrefSpec gref;
  if (gref_kind == 1) {
    std::vector<SymTensor> cells(nc, SymTensor(2));
    std::vector<double> row(3);
    for (std::size_t j = 0; j < nc; ++j) {
      get_doubles(in, row.data(), 3, path);
      cells[j][0] = row[0];
      cells[j][1] = row[1];
      cells[j][2] = row[2];
    }
    gref = GrefSpec::make_per_cell(std::move(cells));
  } else if (gref_kind != 0) {
    throw IoError("'" + path + "': unknown gref kind");
  }

  const int m = packed_size(n);
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(m), std::vector<double>(nc));
  std::vector<double> row(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < nc; ++j) {
    get_doubles(in, row.data(), row.size(), path);
    for (int k = 0; k < m; ++k) comps[static_cast<std::size_t>(k)][j] = row[static_cast<std::size_t>(k)];
  }

  std::vector<std::uint8_t> mask;
  if (has_mask) {
    mask.resize(nc);
    in.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(nc));
    if (!in) throw IoError("'" + path + "': truncated binary field file");
  }
  return field_from_parts(n, {rx, ry}, std::move(gref), std::move(comps), mask, path);
}

}  // namespace

SemimetricField read_field(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + path + "'");
  char first = 0;
  probe.read(&first, 1);
  probe.close();
  return first == kMagic[0] ? read_binary(path) : read_text(path);
}

void write_field(const SemimetricField& f, const std::string& path, FileFormat format) {
  const GridDomain& dom = *f.domain();
  const int n = dom.fiber_dim();
  const int m = packed_size(n);
  const std::size_t nc = dom.n_cells();
  const bool has_mask = f.deflated_mask().count() > 0;

  if (format == FileFormat::text) {
    json doc;
    doc["n"] = n;
    doc["dims"] = {dom.res()[0], dom.res()[1]};
    doc["extent"] = json::array({json::array({-1.0, 1.0}), json::array({-1.0, 1.0})});
    if (dom.gref().kind == GrefSpec::Kind::identity) {
      doc["gref"] = "identity";
    } else {
      // Constant reference metrics are expanded: the format keeps only the
      // two spellings the readers understand.
      json rows = json::array();
      for (std::size_t j = 0; j < nc; ++j) {
        const SymTensor g = dom.gref().kind == GrefSpec::Kind::constant
                                ? dom.gref().constant
                                : dom.gref().cells[j];
        rows.push_back(json::array({g[0], g[1], g[2]}));
      }
      doc["gref"] = json{{"per_cell", std::move(rows)}};
    }
    json data = json::array();
    for (std::size_t j = 0; j < nc; ++j) {
      json row = json::array();
      for (int k = 0; k < m; ++k) row.push_back(f.comp(k)[j]);
      data.push_back(std::move(row));
    }
    doc["data"] = std::move(data);
    if (has_mask) {
      json mask = json::array();
      for (std::size_t j = 0; j < nc; ++j) mask.push_back(f.deflated(j) ? 1 : 0);
      doc["mask"] = std::move(mask);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint8_t>(n));
  put(out, static_cast<std::uint8_t>(2));
  const bool per_cell_gref = dom.gref().kind != GrefSpec::Kind::identity;
  put(out, static_cast<std::uint8_t>(per_cell_gref ? 1 : 0));
  put(out, static_cast<std::int32_t>(dom.res()[0]));
  put(out, static_cast<std::int32_t>(dom.res()[1]));
  const double extent[4] = {-1.0, 1.0, -1.0, 1.0};
  put_doubles(out, extent, 4);
  put(out, static_cast<std::uint8_t>(has_mask ? 1 : 0));
  if (per_cell_gref) {
    for (std::size_t j = 0; j < nc; ++j) {
      const SymTensor g = dom.gref().kind == GrefSpec::Kind::constant ? dom.gref().constant
                                                                      : dom.gref().cells[j];
      const double row[3] = {g[0], g[1], g[2]};
      put_doubles(out, row, 3);
    }
  }
  std::vector<double> row(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < nc; ++j) {
    for (int k = 0; k < m; ++k) row[static_cast<std::size_t>(k)] = f.comp(k)[j];
    put_doubles(out, row.data(), row.size());
  }
  if (has_mask) {
    std::vector<std::uint8_t> mask(nc);
    for (std::size_t j = 0; j < nc; ++j) mask[j] = f.deflated(j) ? 1 : 0;
    out.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(nc));
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

CellMask read_mask(const std::string& path, std::size_t n_cells) {
  const json doc = load_json(path);
  try {
    const json& arr = doc.is_object() && doc.contains("mask") ? doc.at("mask") : doc;
    const auto bits = arr.get<std::vector<std::uint8_t>>();
    if (bits.size() != n_cells)
      throw IoError("'" + path + "': mask length " + std::to_string(bits.size()) +
                    " != cell count " + std::to_string(n_cells));
    CellMask mask(n_cells);
    for (std::size_t j = 0; j < n_cells; ++j) mask.set(j, bits[j] != 0);
    return mask;
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

SequenceManifest read_manifest(const std::string& path) {
  const json doc = load_json(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& rel) {
    const std::filesystem::path p(rel);
    return p.is_absolute() ? p.string() : (base / p).string();
  };
  SequenceManifest manifest;
  try {
    for (const auto& term : doc.at("terms").get<std::vector<std::string>>())
      manifest.terms.push_back(resolve(term));
    if (doc.contains("limit")) manifest.limit = resolve(doc.at("limit").get<std::string>());
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
  if (manifest.terms.empty()) throw IoError("'" + path + "': manifest has no terms");
  return manifest;
}

}  // namespace metgeo

#include "itere/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace itere {

namespace {

constexpr std::string_view kMagic = "ITERE-CKPT";
constexpr std::string_view kVersion = "v1";

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

void put_doubles(std::ostream& out, std::span<const double> values) {
  for (double x : values) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != 8) throw Error("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

void get_doubles(std::istream& in, std::span<double> values) {
  for (auto& x : values) x = std::bit_cast<double>(get_u64(in));
}

}  // namespace

void save_checkpoint(std::ostream& out, const EmbeddingModel& model, std::uint64_t iteration) {
  const auto layout = model.layout();
  out << kMagic << ' ' << kVersion << ' ' << model.dim() << ' ' << layout.scalars << ' ' << layout.blocks << ' '
      << model.num_entities() << ' ' << model.num_relations() << '\n';
  put_doubles(out, model.entity_table());
  put_doubles(out, model.relation_table());
  const auto& adam = model.optimizer();
  put_doubles(out, adam.entity_m);
  put_doubles(out, adam.relation_m);
  put_doubles(out, adam.entity_v);
  put_doubles(out, adam.relation_v);
  put_u64(out, adam.step);
  put_u64(out, iteration);
  if (!out) throw Error("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const EmbeddingModel& model, std::uint64_t iteration) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_checkpoint(out, model, iteration);
}

Checkpoint load_checkpoint(std::istream& in, const std::optional<ExpectedShape>& expected) {
  std::string header;
  if (!std::getline(in, header)) throw Error("checkpoint: missing header");
  std::istringstream fields(header);
  std::string magic, version;
  std::size_t d = 0, ns = 0, nb = 0, ne = 0, nr = 0;
  fields >> magic >> version >> d >> ns >> nb >> ne >> nr;
  if (!fields || magic != kMagic || version != kVersion) throw Error("checkpoint: bad header '" + header + "'");
  std::string extra;
  if (fields >> extra) throw Error("checkpoint: bad header '" + header + "'");
  if (ns + 2 * nb != d) throw Error("checkpoint: header dimension " + std::to_string(d) + " inconsistent with layout");

  const BlockLayout layout{ns, nb};
  if (expected) {
    if (!(expected->layout == layout)) {
      throw Error("checkpoint: dimension mismatch (file d=" + std::to_string(d) + " n_s=" + std::to_string(ns) +
                  ", expected d=" + std::to_string(expected->layout.dim()) +
                  " n_s=" + std::to_string(expected->layout.scalars) + ")");
    }
    if (expected->num_entities && *expected->num_entities != ne) {
      throw Error("checkpoint: entity count mismatch (" + std::to_string(ne) + " vs " +
                  std::to_string(*expected->num_entities) + ")");
    }
    if (expected->num_relations && *expected->num_relations != nr) {
      throw Error("checkpoint: relation count mismatch (" + std::to_string(nr) + " vs " +
                  std::to_string(*expected->num_relations) + ")");
    }
  }

  Checkpoint ckpt;
  ckpt.model = EmbeddingModel(ne, nr, layout);
  auto& model = ckpt.model;
  get_doubles(in, model.entity_table());
  get_doubles(in, model.relation_table());
  auto& adam = model.optimizer();
  get_doubles(in, adam.entity_m);
  get_doubles(in, adam.relation_m);
  get_doubles(in, adam.entity_v);
  get_doubles(in, adam.relation_v);
  adam.step = get_u64(in);
  ckpt.iteration = get_u64(in);
  if (in.peek() != std::char_traits<char>::eof()) throw Error("checkpoint: trailing bytes");
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ExpectedShape>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return load_checkpoint(in, expected);
}

}  // namespace itere

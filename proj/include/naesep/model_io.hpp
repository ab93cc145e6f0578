#ifndef NAESEP_MODEL_IO_HPP
#define NAESEP_MODEL_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "naesep/matrix.hpp"
#include "naesep/nae.hpp"
#include "naesep/separation.hpp"

// Model files are little-endian binary: magic, u32 version, header fields,
// then each weight matrix as u32 rows, u32 cols, rows*cols IEEE-754 doubles
// in row-major order. Save/load round-trips are bitwise exact.

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts unsupported");

namespace naesep {
namespace io_detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
inline void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
inline std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
inline double get_f64(std::istream& is) {
  double v;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

inline void put_matrix(std::ostream& os, const Matrix& m) {
  put_u32(os, static_cast<std::uint32_t>(m.rows()));
  put_u32(os, static_cast<std::uint32_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

inline Matrix get_matrix(std::istream& is) {
  const std::uint32_t rows = get_u32(is);
  const std::uint32_t cols = get_u32(is);
  if (!is || rows == 0 || cols == 0)
    throw std::runtime_error("model file: bad matrix header");
  Matrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!is) throw std::runtime_error("model file: truncated matrix data");
  return m;
}

inline void expect_magic(std::istream& is, const char* magic, const std::string& path) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw std::runtime_error("not a " + std::string(magic) + " model file: " + path);
}

}  // namespace io_detail

inline void save_nae_model(const NAEModel& model, const std::string& path) {
  using namespace io_detail;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_nae_model: cannot open " + path);
  os.write("NAE1", 4);
  put_u32(os, 1);  // version
  put_u32(os, static_cast<std::uint32_t>(model.depth_L));
  put_u32(os, static_cast<std::uint32_t>(model.layer_sizes.size()));
  for (std::size_t s : model.layer_sizes) put_u32(os, static_cast<std::uint32_t>(s));
  put_u64(os, model.seed);
  put_f64(os, model.lambda);
  put_u32(os, static_cast<std::uint32_t>(model.weights.size()));
  for (const Matrix& w : model.weights) put_matrix(os, w);
  if (!os) throw std::runtime_error("save_nae_model: write failed for " + path);
}

inline NAEModel load_nae_model(const std::string& path) {
  using namespace io_detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_nae_model: cannot open " + path);
  expect_magic(is, "NAE1", path);
  const std::uint32_t version = get_u32(is);
  if (version != 1) throw std::runtime_error("load_nae_model: unknown version");
  NAEModel model;
  model.depth_L = get_u32(is);
  const std::uint32_t n_sizes = get_u32(is);
  for (std::uint32_t i = 0; i < n_sizes; ++i) model.layer_sizes.push_back(get_u32(is));
  model.seed = get_u64(is);
  model.lambda = get_f64(is);
  const std::uint32_t n_weights = get_u32(is);
  for (std::uint32_t i = 0; i < n_weights; ++i) model.weights.push_back(get_matrix(is));
  validate_layer_sizes(model.layer_sizes);
  return model;
}

inline void save_source_model(const SourceModel& model, const std::string& path) {
  using namespace io_detail;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_source_model: cannot open " + path);
  os.write("NSM1", 4);
  put_u32(os, 1);  // version
  put_u32(os, static_cast<std::uint32_t>(model.kind));
  put_u32(os, static_cast<std::uint32_t>(model.latent_size));
  put_u64(os, model.seed);
  put_f64(os, model.lambda);
  put_u64(os, model.iterations_run);
  put_f64(os, model.final_cost);
  if (model.kind == ModelKind::NMF) {
    put_u32(os, 1);
    put_matrix(os, model.basis);
  } else {
    put_u32(os, static_cast<std::uint32_t>(model.decoder.weights.size()));
    for (const Matrix& w : model.decoder.weights) put_matrix(os, w);
  }
  if (!os) throw std::runtime_error("save_source_model: write failed for " + path);
}

inline SourceModel load_source_model(const std::string& path) {
  using namespace io_detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_source_model: cannot open " + path);
  expect_magic(is, "NSM1", path);
  const std::uint32_t version = get_u32(is);
  if (version != 1) throw std::runtime_error("load_source_model: unknown version");
  SourceModel model;
  model.kind = static_cast<ModelKind>(get_u32(is));
  model.latent_size = get_u32(is);
  model.seed = get_u64(is);
  model.lambda = get_f64(is);
  model.iterations_run = get_u64(is);
  model.final_cost = get_f64(is);
  const std::uint32_t n_weights = get_u32(is);
  if (model.kind == ModelKind::NMF) {
    if (n_weights != 1) throw std::runtime_error("load_source_model: bad NMF weight count");
    model.basis = get_matrix(is);
  } else {
    for (std::uint32_t i = 0; i < n_weights; ++i)
      model.decoder.weights.push_back(get_matrix(is));
    if (model.decoder.weights.empty())
      throw std::runtime_error("load_source_model: empty decoder");
    model.decoder.latent_size = model.decoder.weights.front().cols();
    model.decoder.output_size = model.decoder.weights.back().rows();
  }
  return model;
}

}  // namespace naesep

#endif  // NAESEP_MODEL_IO_HPP

#include "hedonic/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace hedonic {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string at(const std::string& path, size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const ojson& field(const ojson& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "document" : path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing");
  return *it;
}

const ojson* optional_field(const ojson& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const ojson& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const ojson& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const ojson& as_array(const ojson& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

VectorXd as_vector(const ojson& j, const std::string& path, Index size) {
  as_array(j, path);
  if (static_cast<Index>(j.size()) != size)
    fail(path, "expected " + std::to_string(size) + " entries");
  VectorXd out(size);
  for (size_t t = 0; t < j.size(); ++t) out[t] = as_number(j[t], at(path, t));
  return out;
}

MatrixXd as_matrix(const ojson& j, const std::string& path, Index rows) {
  as_array(j, path);
  if (static_cast<Index>(j.size()) != rows)
    fail(path, "expected " + std::to_string(rows) + " rows");
  if (rows == 0) return MatrixXd(0, 0);
  const auto& first = as_array(j[0], at(path, 0));
  const Index cols = static_cast<Index>(first.size());
  if (cols == 0) fail(at(path, 0), "expected a nonempty row");
  MatrixXd out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    out.row(r) = as_vector(j[r], at(path, r), cols).transpose();
  return out;
}

ojson parse_document(const std::string& text) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

ojson vector_json(const VectorXd& v) {
  ojson out = ojson::array();
  for (Index t = 0; t < v.size(); ++t) out.push_back(v[t]);
  return out;
}

ojson matrix_json(const MatrixXd& m) {
  ojson out = ojson::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

// Allocation rows serialize as [agent, quality, mass] with -1 for the
// side's own stay-out point.
ojson entries_json(const std::vector<Allocation::Entry>& entries, Index base_count,
                   Index stay_out) {
  ojson out = ojson::array();
  for (const auto& e : entries) {
    Index quality = e.quality;
    if (quality == stay_out)
      quality = -1;
    else if (quality >= base_count)
      throw std::invalid_argument("allocation entry at the opposite side's stay-out point");
    out.push_back(ojson::array({e.agent, quality, e.mass}));
  }
  return out;
}

std::vector<Allocation::Entry> parse_entries(const ojson& j, const std::string& path,
                                             Index agents, Index base_count, Index stay_out) {
  as_array(j, path);
  std::vector<Allocation::Entry> out;
  out.reserve(j.size());
  for (size_t t = 0; t < j.size(); ++t) {
    const std::string row_path = at(path, t);
    const auto& row = as_array(j[t], row_path);
    if (row.size() != 3) fail(row_path, "expected [agent, quality, mass]");
    const double agent_raw = as_number(row[0], row_path + "[0]");
    const double quality_raw = as_number(row[1], row_path + "[1]");
    const double mass = as_number(row[2], row_path + "[2]");
    const Index agent = static_cast<Index>(agent_raw);
    Index quality = static_cast<Index>(quality_raw);
    if (agent != agent_raw || agent < 0 || agent >= agents)
      fail(row_path + "[0]", "agent index out of range");
    if (quality != quality_raw || quality < -1 || quality >= base_count)
      fail(row_path + "[1]", "quality index out of range");
    if (!(mass >= 0.0) || !std::isfinite(mass)) fail(row_path + "[2]", "expected a nonnegative mass");
    if (quality == -1) quality = stay_out;
    out.push_back({agent, quality, mass});
  }
  return out;
}

}  // namespace

MarketInstance parse_instance(const std::string& text) {
  const ojson j = parse_document(text);
  MarketInstance inst;

  const auto& qualities = as_array(field(j, "qualities", ""), "qualities");
  if (qualities.empty()) fail("qualities", "expected at least one entry");
  std::vector<VectorXd> coords;
  bool any_coords = false;
  for (size_t k = 0; k < qualities.size(); ++k) {
    const std::string path = at("qualities", k);
    const auto& q = qualities[k];
    if (q.is_string()) {
      inst.quality_ids.push_back(q.get<std::string>());
      coords.emplace_back();
      continue;
    }
    inst.quality_ids.push_back(as_string(field(q, "id", path), join(path, "id")));
    if (const ojson* c = optional_field(q, "coords")) {
      const auto& arr = as_array(*c, join(path, "coords"));
      coords.push_back(as_vector(*c, join(path, "coords"), static_cast<Index>(arr.size())));
      any_coords = true;
    } else {
      coords.emplace_back();
    }
  }
  const Index K = inst.num_qualities();
  if (any_coords) {
    const Index dim = coords.front().size();
    MatrixXd table(K, dim);
    for (Index k = 0; k < K; ++k) {
      if (coords[k].size() != dim)
        fail(join(at("qualities", k), "coords"), "expected " + std::to_string(dim) + " entries");
      table.row(k) = coords[k].transpose();
    }
    inst.quality_coords = table;
  }

  const auto& consumers = as_array(field(j, "consumers", ""), "consumers");
  if (consumers.empty()) fail("consumers", "expected at least one entry");
  const Index m = static_cast<Index>(consumers.size());
  inst.consumer_weights.resize(m);
  inst.utilities.resize(m, K);
  for (Index i = 0; i < m; ++i) {
    const std::string path = at("consumers", i);
    const auto& c = consumers[i];
    inst.consumer_ids.push_back(as_string(field(c, "id", path), join(path, "id")));
    inst.consumer_weights[i] = as_number(field(c, "weight", path), join(path, "weight"));
    inst.utilities.row(i) =
        as_vector(field(c, "utilities", path), join(path, "utilities"), K).transpose();
  }

  const auto& producers = as_array(field(j, "producers", ""), "producers");
  if (producers.empty()) fail("producers", "expected at least one entry");
  const Index n = static_cast<Index>(producers.size());
  inst.producer_weights.resize(n);
  inst.costs.resize(n, K);
  for (Index jdx = 0; jdx < n; ++jdx) {
    const std::string path = at("producers", jdx);
    const auto& p = producers[jdx];
    inst.producer_ids.push_back(as_string(field(p, "id", path), join(path, "id")));
    inst.producer_weights[jdx] = as_number(field(p, "weight", path), join(path, "weight"));
    inst.costs.row(jdx) = as_vector(field(p, "costs", path), join(path, "costs"), K).transpose();
  }

  if (const ojson* g = optional_field(j, "consumer_gradients")) {
    const auto& arr = as_array(*g, "consumer_gradients");
    if (static_cast<Index>(arr.size()) != m)
      fail("consumer_gradients", "expected " + std::to_string(m) + " entries");
    std::vector<MatrixXd> tables;
    for (Index i = 0; i < m; ++i)
      tables.push_back(as_matrix(arr[i], at("consumer_gradients", i), K));
    inst.consumer_gradients = std::move(tables);
  }
  if (const ojson* g = optional_field(j, "producer_gradients")) {
    const auto& arr = as_array(*g, "producer_gradients");
    if (static_cast<Index>(arr.size()) != n)
      fail("producer_gradients", "expected " + std::to_string(n) + " entries");
    std::vector<MatrixXd> tables;
    for (Index jdx = 0; jdx < n; ++jdx)
      tables.push_back(as_matrix(arr[jdx], at("producer_gradients", jdx), K));
    inst.producer_gradients = std::move(tables);
  }

  try {
    validate(inst);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return inst;
}

MarketInstance load_instance(const std::string& path) {
  return parse_instance(read_text_file(path));
}

std::string serialize_instance(const MarketInstance& inst) {
  ojson j;
  j["qualities"] = ojson::array();
  for (Index k = 0; k < inst.num_qualities(); ++k) {
    if (inst.quality_coords) {
      ojson q;
      q["id"] = inst.quality_ids[k];
      q["coords"] = vector_json(inst.quality_coords->row(k).transpose());
      j["qualities"].push_back(std::move(q));
    } else {
      j["qualities"].push_back(inst.quality_ids[k]);
    }
  }
  j["consumers"] = ojson::array();
  for (Index i = 0; i < inst.num_consumers(); ++i) {
    ojson c;
    c["id"] = inst.consumer_ids[i];
    c["weight"] = inst.consumer_weights[i];
    c["utilities"] = vector_json(inst.utilities.row(i).transpose());
    j["consumers"].push_back(std::move(c));
  }
  j["producers"] = ojson::array();
  for (Index jdx = 0; jdx < inst.num_producers(); ++jdx) {
    ojson p;
    p["id"] = inst.producer_ids[jdx];
    p["weight"] = inst.producer_weights[jdx];
    p["costs"] = vector_json(inst.costs.row(jdx).transpose());
    j["producers"].push_back(std::move(p));
  }
  if (inst.consumer_gradients) {
    j["consumer_gradients"] = ojson::array();
    for (const auto& g : *inst.consumer_gradients) j["consumer_gradients"].push_back(matrix_json(g));
  }
  if (inst.producer_gradients) {
    j["producer_gradients"] = ojson::array();
    for (const auto& g : *inst.producer_gradients) j["producer_gradients"].push_back(matrix_json(g));
  }
  return j.dump(2) + "\n";
}

SolutionData parse_solution(const MarketInstance& inst, const std::string& text) {
  const ojson j = parse_document(text);
  const ExtendedQualitySet ext = extend_qualities(inst);
  SolutionData out;
  out.prices = as_vector(field(j, "prices", ""), "prices", inst.num_qualities());
  out.allocation.alpha = parse_entries(field(j, "alpha", ""), "alpha", inst.num_consumers(),
                                       ext.base_count, ext.no_purchase());
  out.allocation.beta = parse_entries(field(j, "beta", ""), "beta", inst.num_producers(),
                                      ext.base_count, ext.no_sale());
  return out;
}

SolutionData load_solution(const MarketInstance& inst, const std::string& path) {
  return parse_solution(inst, read_text_file(path));
}

std::string serialize_solution(const MarketInstance& inst, const VectorXd& prices,
                               const Allocation& alloc) {
  const ExtendedQualitySet ext = extend_qualities(inst);
  ojson j;
  j["prices"] = vector_json(prices);
  j["alpha"] = entries_json(alloc.alpha, ext.base_count, ext.no_purchase());
  j["beta"] = entries_json(alloc.beta, ext.base_count, ext.no_sale());
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  if (file.bad()) throw IoError("cannot read '" + path + "'");
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw IoError("cannot write '" + path + "'");
}

}  // namespace hedonic

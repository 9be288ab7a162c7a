#include "gaugeflow/field_io.hpp"

#include <zlib.h>

#include <bit>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "gaugeflow/error.hpp"

namespace gaugeflow {

static_assert(std::endian::native == std::endian::little, "field files are written in host order");

namespace {

using nlohmann::json;

json component_list(int n, int k) {
  json list = json::array();
  for (IndexMask mask : form_basis(n, k)) {
    json axes = json::array();
    for (int a : mask_axes(mask)) axes.push_back(a + 1);  // axes numbered from 1
    list.push_back(axes);
  }
  return list;
}

template <class T>
T require(const json& header, const char* key, const std::filesystem::path& path) {
  if (!header.contains(key)) throw Error("read_field: header " + path.string() + " lacks '" + key + "'");
  try {
    return header.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("read_field: header " + path.string() + " has a malformed '" + key + "'");
  }
}

}  // namespace

std::filesystem::path header_path(const std::filesystem::path& payload) {
  return std::filesystem::path(payload.string() + ".json");
}

std::uint32_t crc32_of(const void* data, std::size_t bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  // zlib takes 32-bit lengths.
  while (bytes > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(bytes, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    bytes -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_field(const std::filesystem::path& path, const Form& form) {
  if (form.empty()) throw Error("write_field: empty form");
  auto values = form.values();
  const std::size_t bytes = values.size_bytes();

  json header;
  header["schema_version"] = kFieldSchemaVersion;
  header["n"] = form.grid().dim();
  header["res"] = form.grid().res();
  header["degree"] = form.degree();
  header["value_shape"] = {form.rows(), form.cols()};
  header["components"] = component_list(form.grid().dim(), form.degree());
  header["layout"] = "component, value row-major, grid axis 1 fastest";
  header["endianness"] = "little";
  header["dtype"] = "float64";
  header["skew"] = form.skew();
  header["payload_bytes"] = bytes;
  header["crc32"] = crc32_of(values.data(), bytes);

  std::ofstream payload(path, std::ios::binary | std::ios::trunc);
  if (!payload) throw Error("write_field: cannot open " + path.string());
  payload.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(bytes));
  if (!payload) throw Error("write_field: write failed for " + path.string());

  std::ofstream side(header_path(path), std::ios::trunc);
  if (!side) throw Error("write_field: cannot open " + header_path(path).string());
  side << header.dump(2) << '\n';
  if (!side) throw Error("write_field: write failed for " + header_path(path).string());
}

Form read_field(const std::filesystem::path& path) {
  const auto hpath = header_path(path);
  std::ifstream side(hpath);
  if (!side) throw Error("read_field: cannot open header " + hpath.string());
  json header;
  try {
    header = json::parse(side);
  } catch (const json::exception& e) {
    throw Error("read_field: unreadable header " + hpath.string() + ": " + e.what());
  }

  const int version = require<int>(header, "schema_version", hpath);
  if (version != kFieldSchemaVersion) throw Error("read_field: unsupported schema version " + std::to_string(version));
  if (require<std::string>(header, "endianness", hpath) != "little") throw Error("read_field: unsupported endianness");
  if (require<std::string>(header, "dtype", hpath) != "float64") throw Error("read_field: unsupported dtype");
  const int n = require<int>(header, "n", hpath);
  const int res = require<int>(header, "res", hpath);
  const int degree = require<int>(header, "degree", hpath);
  const auto shape = require<std::vector<int>>(header, "value_shape", hpath);
  if (shape.size() != 2) throw Error("read_field: value_shape must have two entries");

  Grid grid(n, res);
  if (degree < 0 || degree > n) throw Error("read_field: degree outside [0, n]");
  const json components = require<json>(header, "components", hpath);
  if (!components.is_array() || static_cast<int>(components.size()) != binomial(n, degree)) {
    throw Error("read_field: header lists " + std::to_string(components.is_array() ? components.size() : 0) +
                " components, expected C(" + std::to_string(n) + "," + std::to_string(degree) +
                ") = " + std::to_string(binomial(n, degree)));
  }
  if (components != component_list(n, degree)) throw Error("read_field: component order differs from lexicographic");

  Form form(grid, degree, {shape[0], shape[1]});
  auto values = form.values();
  const std::size_t expected = values.size_bytes();
  if (require<std::size_t>(header, "payload_bytes", hpath) != expected) {
    throw Error("read_field: header payload length does not match the declared shape");
  }

  std::ifstream payload(path, std::ios::binary | std::ios::ate);
  if (!payload) throw Error("read_field: cannot open " + path.string());
  const auto actual = static_cast<std::size_t>(payload.tellg());
  if (actual != expected) {
    throw Error("read_field: payload length " + std::to_string(actual) + " bytes, expected " +
                std::to_string(expected));
  }
  payload.seekg(0);
  payload.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected));
  if (!payload) throw Error("read_field: read failed for " + path.string());

  if (crc32_of(values.data(), expected) != require<std::uint32_t>(header, "crc32", hpath)) {
    throw Error("read_field: corrupt field (checksum mismatch) in " + path.string());
  }
  form.mark_skew(header.value("skew", false));
  return form;
}

}  // namespace gaugeflow

#pragma once

#include <cstdint>
#include <filesystem>

#include "gaugeflow/form.hpp"

namespace gaugeflow {

inline constexpr int kFieldSchemaVersion = 1;

/// Writes a form as a raw little-endian float64 payload at `path` and a JSON
/// header at `path` + ".json". The payload is the Form storage order:
/// components (increasing multi-indices, lexicographic), then value entries
/// row-major, then grid points with axis 1 fastest. The header records the
/// CRC-32 of the payload.
void write_field(const std::filesystem::path& path, const Form& form);

/// Reads a field written by write_field. Checks the header (schema, shape and
/// component list) before touching the payload, then the payload length and
/// checksum. Throws Error on any mismatch; a checksum failure reads "corrupt field".
Form read_field(const std::filesystem::path& path);

std::filesystem::path header_path(const std::filesystem::path& payload);

/// CRC-32 (zlib polynomial) of a byte range.
std::uint32_t crc32_of(const void* data, std::size_t bytes);

}  // namespace gaugeflow

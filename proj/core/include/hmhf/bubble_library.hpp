#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hmhf/bubbles.hpp"

namespace hmhf {

struct LibraryEntry {
  std::string name;
  BubbleMap bubble;
};

/// Reference bubbles used by the test and benchmark suites: canonical maps of
/// degree 1, 2, 3 plus translated, rescaled, rotated and reflected variants.
std::vector<LibraryEntry> standard_library(Gamma0 gamma0 = Gamma0{});

/// Plain-text listing, one block per bubble:
///
///   bubble <name>
///   degree <k>
///   scale <lambda>
///   center <x> <y>
///   gamma0 <g>
///   reflected <0|1>
///   numerator <n> <re> <im> ...
///   denominator <n> <re> <im> ...
///   [shape <k> <lambda_p> <ax> <ay> <9 rotation entries, row-major>]
///   end
///
/// Numbers use the shortest representation that reads back exactly.
void write_library(std::ostream& out, const std::vector<LibraryEntry>& lib);
std::vector<LibraryEntry> read_library(std::istream& in);

void write_library_file(const std::string& path,
                        const std::vector<LibraryEntry>& lib);
std::vector<LibraryEntry> read_library_file(const std::string& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);
/// Parses the whole token as a double; throws FormatError otherwise.
double parse_double(const std::string& token);

}  // namespace hmhf

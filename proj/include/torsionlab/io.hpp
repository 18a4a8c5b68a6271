#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "torsionlab/asymptotics.hpp"
#include "torsionlab/cone.hpp"
#include "torsionlab/morse.hpp"

namespace tl::io {

using Json = nlohmann::ordered_json;

/// Parses text; syntax errors become ErrorKind::Parse with line and column.
Json parse_text(const std::string& text, const std::string& source = "<input>");
Json load_file(const std::string& path);

/// Every reader accepts an optional "kind" field and rejects a mismatched one.
/// Field errors name the JSON pointer of the offending value.
Operator read_operator(const Json& j, const std::string& where = "");
HilbertComplex read_complex(const Json& j, const std::string& where = "");
ComplexMorphism read_morphism(const Json& j, const std::string& where = "");
MorseDatum read_morse(const Json& j, const std::string& where = "");
Representation read_representation(const Json& j, const std::string& where = "");
/// Sampled, identity, canonical or conformal structure. The holonomy comes from the file when present.
HermitianStructure read_structure(const Json& j, const Operator& holonomy, const std::string& where = "");

struct CoupledInput {
  HilbertComplex c1, c2;
  std::vector<Operator> coupling;
};
CoupledInput read_coupled(const Json& j, const std::string& where = "");

/// {"f1": morphism, "f2": morphism}, f2 ∘ f1.
std::pair<ComplexMorphism, ComplexMorphism> read_composition(const Json& j, const std::string& where = "");

/// {"sub", "middle", "quotient", "inclusion", "projection"}.
ShortExactSequence read_sequence(const Json& j, const std::string& where = "");

/// CSV rows "t,value"; a non-numeric first row is taken as a header. Errors name the line.
std::pair<std::vector<double>, std::vector<double>> read_samples_csv(const std::string& text,
                                                                   const std::string& source = "<csv>");

Json write_operator(const Operator& op);
Json write_complex(const HilbertComplex& c);

/// Finite numbers as-is; NaN and infinities as the strings "nan", "inf", "-inf".
Json number(double x);

}  // namespace tl::io

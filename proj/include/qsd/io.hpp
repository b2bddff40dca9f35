#ifndef QSD_IO_HPP
#define QSD_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "qsd/hermitian.hpp"
#include "qsd/state_set.hpp"

namespace qsd {

using Json = nlohmann::json;

/// Operator document: {"dim": n, "factors": [..], "re": [[..]], "im": [[..]]}.
/// With hexfloat set, entries are written as hexadecimal float strings for
/// bit-exact round trips; the reader accepts either encoding.  "im" and
/// "factors" may be omitted on input (zeros / single factor).
Json operator_to_json(const HermitianOperator& op, bool hexfloat = false);
HermitianOperator operator_from_json(const Json& doc,
                                     const Tolerances& tol = default_tolerances());

/// Same document read as a normalized density operator.
DensityOperator state_from_json(const Json& doc, const Tolerances& tol = default_tolerances());

/// Set descriptor: {"kind": "...", ...payload}.  Payload fields follow the
/// factory arguments of each kind; "tensor_power" descriptors carry {"copies",
/// "base"} and are expanded on load.  Malformed documents raise
/// precondition_error naming the offending field.
Json set_to_json(const StateSet& set, bool hexfloat = false);
StateSet set_from_json(const Json& doc, const Tolerances& tol = default_tolerances());

/// File helpers; failures raise precondition_error naming the path.
Json load_json(const std::string& path);
void save_text(const std::string& text, const std::string& path);

/// RFC 4180 table: header row then data rows, CRLF line endings, quoting
/// only where needed.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

}  // namespace qsd

#endif

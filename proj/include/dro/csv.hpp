#ifndef DRO_CSV_HPP
#define DRO_CSV_HPP

#include <string>
#include <vector>

namespace dro {

// 12 significant digits, '.' decimal separator.
std::string format_value(double v);

// RFC-4180 CSV with a header row and LF line endings. Cells are quoted only
// when they contain a comma, quote, or newline.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_csv_numeric(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);

} // namespace dro

#endif

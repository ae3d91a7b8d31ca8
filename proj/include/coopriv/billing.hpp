#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coopriv/obfuscation.hpp"
#include "coopriv/scheduler.hpp"

namespace coopriv {

/// Currency in integer minor units (e.g. cents).
using Money = std::int64_t;

struct Tariff {
  Money unit_cost{0};
  double priority_multiplier{1.0};
  Money subscription_flat{0};

  void validate() const;
  /// Amount charged for one served frame at the given priority. Every frame
  /// of one priority has the same price.
  Money price(Priority priority) const;
};

struct LineItem {
  double t{0.0};
  Priority priority{Priority::normal};
  Money amount{0};
};

struct BillingPeriod {
  double start{0.0};
  double end{0.0};

  /// Half-open [start, end).
  bool contains(double t) const { return t >= start && t < end; }
};

struct Invoice {
  std::string payee;  // sharer producing the frames
  std::string recipient_id;
  BillingPeriod period;
  std::vector<LineItem> line_items;
  Money total{0};
};

/// One invoice per recipient: the subscribed recipients in the given order,
/// then any other recipient served in the period in order of first service.
/// Each served request whose frame was produced in the period adds one line
/// item.
std::vector<Invoice> meter(const FrameLedger& ledger, const Tariff& tariff, const BillingPeriod& period,
                           const std::vector<std::string>& subscribed, const std::string& payee);

struct SettlementMatrix {
  std::vector<std::string> payers;
  std::vector<std::string> payees;
  /// amounts[payer][payee]
  std::vector<std::vector<Money>> amounts;

  Money payer_total(std::size_t payer) const;
  Money payee_total(std::size_t payee) const;
  Money grand_total() const;
};

/// Sums invoice totals into a payer (recipient) x payee (sharer) matrix.
/// Rows and columns follow first appearance in `invoices`.
SettlementMatrix settle(const std::vector<Invoice>& invoices);

void write_settlement_csv(std::ostream& out, const SettlementMatrix& matrix);

}  // namespace coopriv

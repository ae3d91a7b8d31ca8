#include "coopriv/billing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "coopriv/error.hpp"

namespace coopriv {

void Tariff::validate() const {
  if (unit_cost < 0) throw InvalidParameter("Tariff.unit_cost must be >= 0");
  if (!(priority_multiplier >= 1.0) || !std::isfinite(priority_multiplier))
    throw InvalidParameter("Tariff.priority_multiplier must be >= 1");
  if (subscription_flat < 0) throw InvalidParameter("Tariff.subscription_flat must be >= 0");
}

Money Tariff::price(Priority priority) const {
  if (priority == Priority::normal) return unit_cost;
  return static_cast<Money>(std::llround(static_cast<double>(unit_cost) * priority_multiplier));
}

std::vector<Invoice> meter(const FrameLedger& ledger, const Tariff& tariff, const BillingPeriod& period,
                           const std::vector<std::string>& subscribed, const std::string& payee) {
  tariff.validate();
  for (std::size_t i = 1; i < ledger.size(); ++i)
    if (ledger[i].t_produced < ledger[i - 1].t_produced) throw InvalidParameter("ledger must be time-sorted");

  std::vector<Invoice> invoices;
  std::map<std::string, std::size_t> index;
  auto invoice_for = [&](const std::string& recipient) -> Invoice& {
    auto [it, inserted] = index.try_emplace(recipient, invoices.size());
    if (inserted) invoices.push_back({payee, recipient, period, {}, tariff.subscription_flat});
    return invoices[it->second];
  };
  for (const auto& r : subscribed) invoice_for(r);

  for (const auto& frame : ledger) {
    if (!period.contains(frame.t_produced)) continue;
    for (const auto& request : frame.served_requests) {
      Invoice& invoice = invoice_for(request.recipient_id);
      const Money amount = tariff.price(request.priority);
      invoice.line_items.push_back({frame.t_produced, request.priority, amount});
      invoice.total += amount;
    }
  }
  return invoices;
}

Money SettlementMatrix::payer_total(std::size_t payer) const {
  Money sum = 0;
  for (Money m : amounts.at(payer)) sum += m;
  return sum;
}

Money SettlementMatrix::payee_total(std::size_t payee) const {
  Money sum = 0;
  for (const auto& row : amounts) sum += row.at(payee);
  return sum;
}

Money SettlementMatrix::grand_total() const {
  Money sum = 0;
  for (std::size_t i = 0; i < amounts.size(); ++i) sum += payer_total(i);
  return sum;
}

SettlementMatrix settle(const std::vector<Invoice>& invoices) {
  SettlementMatrix m;
  std::map<std::string, std::size_t> payer_index, payee_index;
  for (const auto& inv : invoices) {
    if (payer_index.try_emplace(inv.recipient_id, m.payers.size()).second) m.payers.push_back(inv.recipient_id);
    if (payee_index.try_emplace(inv.payee, m.payees.size()).second) m.payees.push_back(inv.payee);
  }
  m.amounts.assign(m.payers.size(), std::vector<Money>(m.payees.size(), 0));
  for (const auto& inv : invoices) m.amounts[payer_index[inv.recipient_id]][payee_index[inv.payee]] += inv.total;
  return m;
}

void write_settlement_csv(std::ostream& out, const SettlementMatrix& matrix) {
  out << "payer";
  for (const auto& p : matrix.payees) out << ',' << p;
  out << '\n';
  for (std::size_t i = 0; i < matrix.payers.size(); ++i) {
    out << matrix.payers[i];
    for (Money a : matrix.amounts[i]) out << ',' << a;
    out << '\n';
  }
}

}  // namespace coopriv

/// Deferring state of a node that is not part of the contention which
/// produced an overheard CTS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeferState {
    #[default]
    Clear,
    /// Holding off channel access until an ACK ends the overheard
    /// exchange or the guard timeout fires.
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeferEvent {
    HeardCts,
    HeardAck,
    Timeout,
}

/// Asynchronous-access deferring rule: an overheard CTS arms the defer
/// state; the ACK ending the exchange, or the timeout guarding against
/// a lost ACK, clears it.
pub fn deferring_update(_state: DeferState, event: DeferEvent) -> DeferState {
    match event {
        DeferEvent::HeardCts => DeferState::Deferred,
        DeferEvent::HeardAck | DeferEvent::Timeout => DeferState::Clear,
    }
}
